//! Exact scalar arithmetic for the solver: arbitrary-precision rationals,
//! the exponent-pair value type, verified power approximation, logarithmic
//! rounding, and prime generation.

mod approx;
mod powvalue;
mod primes;

pub use approx::PowLadder;
pub use powvalue::{lex_cmp, PowValue};
pub use primes::sieve_primes;

use num::{BigInt, BigRational, One, Zero};

use crate::error::{SolverError, SolverResult};

/// Exact rational scalar. Canonical (gcd-reduced, positive denominator) by
/// construction of the underlying type.
pub type Rational = BigRational;

/// Smallest `e >= 0` with `2^e >= x`, for `x >= 1`.
fn ceil_log2(x: &BigInt) -> u64 {
    if x <= &BigInt::one() {
        0
    } else {
        (x - 1u8).bits()
    }
}

/// Global parameters of a solve, all derived from the agent count `n` and
/// the utility bound `U`.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub n: usize,
    pub utility_bound: u64,
    /// Price grid parameter: prices are powers of `1 + 1/L`.
    pub l: BigInt,
    /// Infinitesimal grid parameter: perturbations are powers of `1 + 1/L'`.
    pub l_prime: BigInt,
    /// Bound on the perturbation primes (grown until enough primes exist).
    pub prime_bound: u64,
    /// Price exponents stay in `[0, K]`; `(1+1/L)^K` covers the price range.
    pub k: BigInt,
    /// Termination threshold for the total surplus.
    pub epsilon: Rational,
    /// Constant governing the maximum step factor per phase.
    pub big_c: Rational,
    primes: Vec<u64>,
    ladder: PowLadder,
    ladder_prime: PowLadder,
}

impl SolverConfig {
    pub fn new(n: usize, utility_bound: u64) -> Self {
        assert!(n >= 1, "need at least one agent");
        assert!(utility_bound >= 1, "utility bound must be positive");
        let n_big = BigInt::from(n);
        let u_big = BigInt::from(utility_bound);

        // L = 128 * n^(5n+5) * U^(4n)
        let l = BigInt::from(128u8)
            * n_big.pow(5 * n as u32 + 5)
            * u_big.pow(4 * n as u32);

        // Smallest power-of-two exponent covering (nU)^n; K = L*m then gives
        // (1+1/L)^K >= 2^m >= (nU)^n because (1+1/L)^L >= 2 for every L >= 1.
        let price_range = (&n_big * &u_big).pow(n as u32);
        let m = ceil_log2(&price_range);
        let k = &l * BigInt::from(m);

        // epsilon = 1 / (8 n^(4n) U^(3n))
        let epsilon = Rational::new(
            BigInt::one(),
            BigInt::from(8u8) * n_big.pow(4 * n as u32) * u_big.pow(3 * n as u32),
        );

        let big_c = Rational::from_integer(BigInt::from(355u16));

        // Prime bound Q = 8 n^2 ceil(log2 n), doubled until at least n^2
        // primes are available for the utility edges.
        let mut prime_bound = (8 * n as u64 * n as u64 * ceil_log2(&n_big)).max(2);
        let mut primes = sieve_primes(prime_bound).expect("bound is at least 2");
        while primes.len() < n * n {
            prime_bound *= 2;
            primes = sieve_primes(prime_bound).expect("bound is at least 2");
        }

        let l_prime = BigInt::from(8 * n as u64) * BigInt::from(prime_bound).pow(2 * n as u32);

        let ladder_range = BigInt::from(4u8) * &k + BigInt::from(4u8) * &l + 4u8;
        let ladder = PowLadder::new(l.clone(), ladder_range);
        let prime_range =
            BigInt::from(2u8) * &l_prime * BigInt::from(ceil_log2(&BigInt::from(prime_bound)) + 2);
        let ladder_prime = PowLadder::new(l_prime.clone(), prime_range);

        SolverConfig {
            n,
            utility_bound,
            l,
            l_prime,
            prime_bound,
            k,
            epsilon,
            big_c,
            primes,
            ladder,
            ladder_prime,
        }
    }

    /// Distinct primes available for perturbation, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Rational with denominator `L` approximating `(1+1/L)^a`, both
    /// additively within `1/L` and multiplicatively within `1+1/L`.
    pub fn pow_approx(&self, a: &BigInt) -> SolverResult<Rational> {
        if a < &BigInt::zero() || a > &self.k {
            return Err(SolverError::ExponentOutOfRange(format!(
                "price exponent {a} outside [0, {}]",
                self.k
            )));
        }
        self.ladder.approx_with_denominator(a, &self.l)
    }

    /// Largest `g >= 0` with `(1+1/L)^g <= xhat`; a multiplicative
    /// `(1+1/L)`-approximation of `xhat >= 1`.
    pub fn round_to_power(&self, xhat: &Rational) -> SolverResult<BigInt> {
        self.ladder.floor_log(xhat)
    }

    /// Exponent of the `(1+1/L)`-power approximating an integer utility.
    pub fn utility_exponent(&self, v: u64) -> SolverResult<BigInt> {
        self.ladder.exponent_of(&BigInt::from(v))
    }

    /// Exponent of the `(1+1/L')`-power approximating a perturbation prime.
    pub fn prime_exponent(&self, q: u64) -> SolverResult<BigInt> {
        self.ladder_prime.exponent_of(&BigInt::from(q))
    }
}
