//! Fixtures shared by the benchmarks.

use spectral_lift::clifford::build_clifford;
use spectral_lift::dirac_lift::{AssembledTriple, BaseTriple};
use spectral_lift::linalg::diag_real;
use spectral_lift::models::crossed_product::{build_crossed_product, diagonal_base, Automorphism, CrossedProductSpec, ShiftGroup};

/// ℂ⁴ ⋊ ℤ by the cyclic permutation with d_b = diag(0.5, −1, 2, 3).
pub fn crossed_product(radius: usize) -> AssembledTriple {
    let base = diagonal_base(4);
    let spec = CrossedProductSpec {
        base: base.clone(),
        automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
        group: ShiftGroup::Integers { radius },
    };
    let triple = BaseTriple::new(base, diag_real(&[0.5, -1.0, 2.0, 3.0])).expect("valid base triple");
    build_crossed_product(spec, &triple, &build_clifford(1, true)).expect("valid automorphism").1
}
