//! Fixed-point natural logarithms with rigorous error bounds.
//!
//! A value is held as an integer `v` at scale `2^w`, together with a bound
//! `e` (in units of `2^-w`) such that the true logarithm lies in
//! `[(v - e) / 2^w, (v + e) / 2^w]`. Every floor operation below is
//! accounted for in the bound.

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, Signed, Zero};

/// An enclosure `value ± err` at scale `2^scale_bits`.
#[derive(Debug, Clone)]
pub(crate) struct LogEnclosure {
    pub value: BigInt,
    pub err: BigUint,
}

/// `2 * atanh(z)` for a fixed-point `z` in `[0, 1/3)` whose own error is at
/// most 2 ulps. Returns the value and the error bound in ulps.
fn two_atanh(z: &BigInt, w: u32) -> (BigInt, BigUint) {
    let scale = BigInt::one() << w;
    let z2: BigInt = (z * z) >> w;
    let mut power = z.clone();
    let mut sum = BigInt::zero();
    let mut terms: u64 = 0;
    let mut k: u64 = 1;
    while !power.is_zero() {
        sum += &power / BigInt::from(k);
        power = (&power * &z2) >> w;
        k += 2;
        terms += 1;
    }
    debug_assert!(sum < scale);
    // Each term carries at most 3 ulps of error; the dropped tail is below 3 ulps.
    (sum << 1u32, BigUint::from(8 * terms + 64))
}

/// `ln 2` at scale `2^w`.
pub(crate) fn ln2(w: u32) -> LogEnclosure {
    let z = (BigInt::one() << w) / BigInt::from(3u8);
    let (value, err) = two_atanh(&z, w);
    LogEnclosure { value, err }
}

/// `ln b` for an integer `b >= 1` at scale `2^w`.
pub(crate) fn ln_int(b: &BigUint, w: u32, ln2: &LogEnclosure) -> LogEnclosure {
    debug_assert!(!b.is_zero());
    let k = b.bits() - 1;
    // Mantissa m = b / 2^k in [1, 2), truncated to w fractional bits.
    let b = BigInt::from_biguint(BigSign::Plus, b.clone());
    let m = if k <= w as u64 {
        b << (w as u64 - k)
    } else {
        b >> (k - w as u64)
    };
    let scale = BigInt::one() << w;
    // z = (m - 1) / (m + 1) lies in [0, 1/3).
    let z = ((&m - &scale) << w) / (&m + &scale);
    let (ln_m, err_m) = two_atanh(&z, w);
    let kk = BigInt::from(k);
    LogEnclosure {
        value: &kk * &ln2.value + ln_m,
        err: BigUint::from(k) * &ln2.err + err_m,
    }
}

/// Sign of `sum e_i * ln b_i`, if the enclosure at `w` bits excludes zero.
pub(crate) fn signed_log_sum(terms: &[(&BigUint, &BigInt)], w: u32) -> Option<std::cmp::Ordering> {
    let l2 = ln2(w);
    let mut total = BigInt::zero();
    let mut err = BigUint::zero();
    for (base, exp) in terms {
        if base.is_one() || exp.is_zero() {
            continue;
        }
        let enc = ln_int(base, w, &l2);
        total += *exp * &enc.value;
        err += exp.magnitude() * &enc.err;
    }
    let err = BigInt::from_biguint(BigSign::Plus, err);
    if total.abs() > err {
        Some(if total.is_positive() {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Less
        })
    } else {
        None
    }
}
