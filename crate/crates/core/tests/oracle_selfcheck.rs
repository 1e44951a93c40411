mod common;

use num_bigint::BigInt;

#[test]
fn inverse_j_series_starts_correctly() {
    // 1/j = q - 744 q^2 + 356652 q^3 - ...
    let s = common::inverse_j_series(4);
    assert_eq!(s, vec![0, 1, -744, 356652].into_iter().map(BigInt::from).collect::<Vec<_>>());
}

#[test]
fn reversion_matches_known_coefficients() {
    // q = t + 744 t^2 + 750420 t^3 + 872769632 t^4 + ...
    let g = common::q_of_inverse_j(5);
    assert_eq!(g, vec![0i64, 1, 744, 750420, 872769632].into_iter().map(BigInt::from).collect::<Vec<_>>());
}

#[test]
fn binomial_expansion_of_gamma() {
    // gamma = 1 + (gamma - 1)
    let coeffs: Vec<BigInt> = vec![0, 1, 0, 0, 0].into_iter().map(BigInt::from).collect();
    let c = common::binomial_expansion(&coeffs, 3);
    assert_eq!(c, vec![1, 1, 0].into_iter().map(BigInt::from).collect::<Vec<_>>());
}
