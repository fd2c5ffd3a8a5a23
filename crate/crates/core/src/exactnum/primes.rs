use crate::error::{SolverError, SolverResult};

/// All primes up to and including `bound`, ascending (Sieve of Eratosthenes).
pub fn sieve_primes(bound: u64) -> SolverResult<Vec<u64>> {
    if bound < 2 {
        return Err(SolverError::SieveBoundTooSmall);
    }
    let n = bound as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    is_prime[1] = false;
    let mut i = 2usize;
    while i * i <= n {
        if is_prime[i] {
            let mut j = i * i;
            while j <= n {
                is_prime[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    Ok((2..=n as u64).filter(|&v| is_prime[v as usize]).collect())
}
