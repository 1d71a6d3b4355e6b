//! The benchmark inputs are well-posed, so timings measure the intended path.

use amt_core::open::jordan::DEFAULT_CLUSTER_TOL;
use amt_core::open::{jordan_decompose, LiouvillianFamily, VSystemParams};

#[test]
fn vsystem_liouvillian_decomposes_and_certifies() {
    let params = VSystemParams::desk_scale(0.0194, f64::INFINITY);
    let l = params
        .family()
        .unwrap()
        .liouvillian(1.0, params.nbar)
        .matrix;
    assert_eq!(l.nrows(), 9);
    let dec = jordan_decompose(&l, DEFAULT_CLUSTER_TOL).unwrap();
    assert!(dec.certified);
    assert_eq!(dec.chain_lengths().iter().sum::<usize>(), 9);
}
