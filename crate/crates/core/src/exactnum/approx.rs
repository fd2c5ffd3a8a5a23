use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{SolverError, SolverResult};

/// Precomputed interval ladder for powers of `1 + 1/M`.
///
/// Entry `j` holds integers `(lo, hi)` with
/// `lo/M^3 <= (1+1/M)^(2^j) <= hi/M^3`. All derived power evaluations keep
/// their endpoints over the fixed denominator `M^3`, so a chain of `t`
/// interval multiplications accumulates at most `t` units of `1/M^3`
/// rounding on each side plus doubling of the incoming relative error.
/// With `M = L` and exponents bounded by a small multiple of `K = O(L)`
/// the final relative width stays far below `1/M`, which is what the
/// approximation contracts need.
#[derive(Clone, Debug)]
pub struct PowLadder {
    base: BigInt,
    den: BigInt,
    entries: Vec<(BigInt, BigInt)>,
    max_exponent: BigInt,
}

fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// Round `num/den` (both positive) to the nearest integer, halves away
/// from zero.
fn div_round_half_up(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(num.sign() != Sign::Minus && den.is_positive());
    (num * 2u8 + den).div_floor(&(den * 2u8))
}

impl PowLadder {
    /// Build a ladder for base `1 + 1/m` covering exponents up to
    /// `max_exponent`.
    pub fn new(m: BigInt, max_exponent: BigInt) -> Self {
        assert!(m >= BigInt::from(2u8), "power base parameter must be >= 2");
        assert!(!max_exponent.is_negative());
        let den = &m * &m * &m;
        let first = (&m + 1u8) * &m * &m;
        let mut entries = vec![(first.clone(), first)];
        let mut covered = BigInt::one();
        while covered < max_exponent {
            let (lo, hi) = entries.last().unwrap();
            let next_lo = div_floor(&(lo * lo), &den);
            let next_hi = div_ceil(&(hi * hi), &den);
            entries.push((next_lo, next_hi));
            covered *= 2u8;
        }
        PowLadder {
            base: m,
            den,
            entries,
            max_exponent,
        }
    }

    pub fn base(&self) -> &BigInt {
        &self.base
    }

    pub fn max_exponent(&self) -> &BigInt {
        &self.max_exponent
    }

    fn mul_intervals(&self, a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> (BigInt, BigInt) {
        (
            div_floor(&(&a.0 * &b.0), &self.den),
            div_ceil(&(&a.1 * &b.1), &self.den),
        )
    }

    /// Interval numerators `(lo, hi)` over `M^3` enclosing `(1+1/M)^a`.
    pub fn pow_interval(&self, a: &BigInt) -> SolverResult<(BigInt, BigInt)> {
        if a.is_negative() || a > &self.max_exponent {
            return Err(SolverError::ExponentOutOfRange(format!(
                "exponent {a} outside [0, {}]",
                self.max_exponent
            )));
        }
        let mut acc = (self.den.clone(), self.den.clone());
        for (j, entry) in self.entries.iter().enumerate() {
            if a.bit(j as u64) {
                acc = self.mul_intervals(&acc, entry);
            }
        }
        Ok(acc)
    }

    /// Round `(1+1/M)^a` to a rational with denominator `out_den`, verified
    /// to be both an additive `1/out_den`- and a multiplicative
    /// `(1+1/out_den)`-approximation.
    pub fn approx_with_denominator(&self, a: &BigInt, out_den: &BigInt) -> SolverResult<BigRational> {
        let (lo, hi) = self.pow_interval(a)?;
        let num = div_round_half_up(&((&lo + &hi) * out_den), &(&self.den * 2u8));

        // Contract checks against the certified enclosure.
        let additive_low = (&num - 1u8) * &self.den <= &lo * out_den;
        let additive_high = &hi * out_den <= (&num + 1u8) * &self.den;
        let mult_low = &lo * (out_den + 1u8) >= &num * &self.den;
        let mult_high = &num * (out_den + 1u8) * &self.den >= &hi * out_den * out_den;
        assert!(
            additive_low && additive_high && mult_low && mult_high,
            "power approximation drifted outside its certified interval"
        );
        Ok(BigRational::new(num, out_den.clone()))
    }

    /// Largest `g >= 0` with `(1+1/M)^g <= xhat`, certified through interval
    /// comparisons. When `xhat` is indistinguishable from a power at the
    /// ladder's resolution, that power's exponent is returned; either way
    /// the result is a multiplicative `(1+1/M)`-approximation of `xhat`.
    pub fn floor_log(&self, xhat: &BigRational) -> SolverResult<BigInt> {
        if xhat < &BigRational::one() {
            return Err(SolverError::ValueBelowOne(format!(
                "cannot take a power exponent of {xhat}"
            )));
        }
        // x compared against lo/den, hi/den via cross multiplication.
        let x_scaled = xhat.numer() * &self.den; // compare against endpoint * denom(x)
        let q = xhat.denom();

        let mut top = None;
        for (j, (lo, hi)) in self.entries.iter().enumerate() {
            if lo * q > x_scaled {
                top = Some(j);
                break;
            }
            if hi * q >= x_scaled {
                // xhat sits inside the enclosure of (1+1/M)^(2^j).
                return Ok(BigInt::one() << j);
            }
        }
        let top = top.ok_or_else(|| {
            SolverError::ExponentOutOfRange(format!(
                "{xhat} exceeds the ladder range (max exponent {})",
                self.max_exponent
            ))
        })?;
        if top == 0 {
            return Ok(BigInt::zero());
        }

        let mut acc = (self.den.clone(), self.den.clone());
        let mut g = BigInt::zero();
        for jj in (0..top).rev() {
            let cand = self.mul_intervals(&acc, &self.entries[jj]);
            if &cand.1 * q <= x_scaled {
                acc = cand;
                g.set_bit(jj as u64, true);
            } else if &cand.0 * q > x_scaled {
                // certainly above xhat: skip this bit
            } else {
                g.set_bit(jj as u64, true);
                return Ok(g);
            }
        }
        Ok(g)
    }

    /// Exponent `e` with `(1+1/M)^e` a multiplicative approximation of the
    /// integer `v >= 1`.
    pub fn exponent_of(&self, v: &BigInt) -> SolverResult<BigInt> {
        if v < &BigInt::one() {
            return Err(SolverError::ValueBelowOne(format!(
                "cannot approximate {v} by a positive power"
            )));
        }
        self.floor_log(&BigRational::from_integer(v.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    /// Exact `((m+1)/m)^g` for small `g`; the independent check the interval
    /// machinery is measured against.
    fn pow_exact(m: u64, g: u64) -> BigRational {
        let base = BigRational::new(BigInt::from(m + 1), BigInt::from(m));
        let mut acc = BigRational::one();
        for _ in 0..g {
            acc *= &base;
        }
        acc
    }

    fn ladder(m: u64, max_exp: u64) -> PowLadder {
        PowLadder::new(BigInt::from(m), BigInt::from(max_exp))
    }

    #[test]
    fn approx_matches_exact_for_small_exponents() {
        let m = 997u64;
        let lad = ladder(m, 4096);
        let den = BigInt::from(m);
        for g in 0..60u64 {
            let approx = lad
                .approx_with_denominator(&BigInt::from(g), &den)
                .unwrap();
            let exact = pow_exact(m, g);
            let diff = (&approx - &exact).abs();
            assert!(
                diff <= BigRational::new(BigInt::one(), den.clone()),
                "additive drift at exponent {g}"
            );
            let bound = BigRational::new(BigInt::from(m + 1), BigInt::from(m));
            assert!(&approx * &bound >= exact && &exact * &bound >= approx);
        }
    }

    #[test]
    fn approx_identity_cases() {
        let m = 1009u64;
        let lad = ladder(m, 1 << 20);
        let den = BigInt::from(m);
        assert_eq!(
            lad.approx_with_denominator(&BigInt::zero(), &den).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            lad.approx_with_denominator(&BigInt::one(), &den).unwrap(),
            BigRational::new(BigInt::from(m + 1), BigInt::from(m))
        );
    }

    #[test]
    fn approx_exponent_two_against_exact_square() {
        let m = 997u64;
        let lad = ladder(m, 64);
        let den = BigInt::from(m);
        let approx = lad.approx_with_denominator(&BigInt::from(2u8), &den).unwrap();
        let exact = pow_exact(m, 2);
        assert!((&approx - &exact).abs() <= BigRational::new(BigInt::one(), den));
    }

    #[test]
    fn floor_log_round_trips_exact_powers() {
        let m = 503u64;
        let lad = ladder(m, 4096);
        for g in [0u64, 1, 2, 3, 7, 16, 100, 501, 1000] {
            let exact = pow_exact(m, g);
            assert_eq!(lad.floor_log(&exact).unwrap(), BigInt::from(g), "g = {g}");
        }
    }

    #[test]
    fn floor_log_of_two_is_a_multiplicative_approximation() {
        let m = 457u64;
        let lad = ladder(m, 4096);
        let g = lad.floor_log(&BigRational::from_integer(2.into())).unwrap();
        let g = g.to_u64().unwrap();
        let two = BigRational::from_integer(2.into());
        let at = pow_exact(m, g);
        let above = pow_exact(m, g + 1);
        assert!(at <= two && two < above);
        let bound = BigRational::new(BigInt::from(m + 1), BigInt::from(m));
        assert!(&at * &bound >= two);
    }

    #[test]
    fn floor_log_rejects_values_below_one() {
        let lad = ladder(101, 64);
        let half = BigRational::new(BigInt::one(), BigInt::from(2u8));
        assert!(matches!(
            lad.floor_log(&half),
            Err(SolverError::ValueBelowOne(_))
        ));
    }

    #[test]
    fn exponent_of_small_integers() {
        let m = 677u64;
        let lad = ladder(m, 1 << 14);
        assert_eq!(lad.exponent_of(&BigInt::one()).unwrap(), BigInt::zero());
        let e7 = lad.exponent_of(&BigInt::from(7u8)).unwrap().to_u64().unwrap();
        let seven = BigRational::from_integer(7.into());
        let at = pow_exact(m, e7);
        let bound = BigRational::new(BigInt::from(m + 1), BigInt::from(m));
        assert!(at <= seven && &at * &bound >= seven);
    }

    #[test]
    fn interval_encloses_exact_value() {
        let m = 211u64;
        let lad = ladder(m, 4096);
        let den = BigInt::from(m).pow(3);
        for g in [1u64, 5, 33, 1024, 4000] {
            let (lo, hi) = lad.pow_interval(&BigInt::from(g)).unwrap();
            let exact = pow_exact(m, g);
            let lo_r = BigRational::new(lo, den.clone());
            let hi_r = BigRational::new(hi, den.clone());
            assert!(lo_r <= exact && exact <= hi_r, "enclosure failed at {g}");
        }
    }
}
