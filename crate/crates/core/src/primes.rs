//! The finite prime set `p < p*` and the per-prime quantities every sum
//! and product in the crate consumes.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::numeric::{ln_double_double, reduced_phase, DoubleDouble};

/// One prime with its logarithm and amplitude `1/√p` precomputed.
///
/// `log_p_lo` carries the bits of `ln p` below `log_p`, so phases `E ln p`
/// stay accurate at large `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeEntry {
    pub p: u64,
    pub log_p: f64,
    pub log_p_lo: f64,
    pub a_p: f64,
}

impl PrimeEntry {
    pub fn new(p: u64) -> Self {
        let pf = p as f64;
        let log = ln_double_double(p);
        PrimeEntry { p, log_p: log.hi, log_p_lo: log.lo, a_p: 1.0 / pf.sqrt() }
    }

    /// `x ln p` reduced into `[−π, π]`.
    #[inline]
    pub fn phase(&self, x: f64) -> f64 {
        self.phase_of(DoubleDouble::from_f64(x))
    }

    /// As [`phase`](Self::phase) for an argument held in double-double.
    #[inline]
    pub fn phase_of(&self, x: DoubleDouble) -> f64 {
        reduced_phase(x, DoubleDouble { hi: self.log_p, lo: self.log_p_lo })
    }

    /// `A_p² = 1/p`, computed exactly rather than by squaring `a_p`.
    #[inline]
    pub fn a_p_sq(&self) -> f64 {
        1.0 / self.p as f64
    }
}

/// All primes strictly below `p_star`, ascending.
///
/// Immutable once built; share it freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeTable {
    p_star: u64,
    entries: Vec<PrimeEntry>,
}

impl PrimeTable {
    /// Sieve every prime `p < p_star`.
    pub fn build(p_star: u64) -> Result<Self> {
        if p_star < 2 {
            return Err(invalid("prime cutoff must be at least 2"));
        }
        let entries = sieve_below(p_star).into_iter().map(PrimeEntry::new).collect();
        Ok(PrimeTable { p_star, entries })
    }

    /// Rebuild a table from an already known list of primes (e.g. a cache file).
    ///
    /// Checks ordering and the cutoff; primality is trusted.
    pub fn from_primes(p_star: u64, primes: &[u64]) -> Result<Self> {
        if p_star < 2 {
            return Err(invalid("prime cutoff must be at least 2"));
        }
        let mut prev = 1u64;
        for &p in primes {
            if p <= prev {
                return Err(invalid("primes must be strictly ascending and >= 2"));
            }
            if p >= p_star {
                return Err(invalid("prime not below the cutoff"));
            }
            prev = p;
        }
        Ok(PrimeTable { p_star, entries: primes.iter().copied().map(PrimeEntry::new).collect() })
    }

    pub fn empty() -> Self {
        PrimeTable { p_star: 2, entries: Vec::new() }
    }

    #[inline]
    pub fn p_star(&self) -> u64 {
        self.p_star
    }

    #[inline]
    pub fn entries(&self) -> &[PrimeEntry] {
        &self.entries
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.p)
    }

    /// The primes below a smaller cutoff, as a new table (a prefix of this one).
    pub fn truncated(&self, p_star: u64) -> Result<Self> {
        if p_star < 2 {
            return Err(invalid("prime cutoff must be at least 2"));
        }
        let end = self.entries.partition_point(|e| e.p < p_star);
        if p_star > self.p_star {
            return Err(invalid("cannot extend a table by truncation"));
        }
        Ok(PrimeTable { p_star, entries: self.entries[..end].to_vec() })
    }

    pub fn contains(&self, p: u64) -> bool {
        self.entries.binary_search_by(|e| e.p.cmp(&p)).is_ok()
    }
}

/// Odd-only Eratosthenes sieve packed 64 odd numbers per word.
///
/// Bit `i` stands for the odd number `2i + 3`; a set bit marks a composite.
fn sieve_below(limit: u64) -> Vec<u64> {
    if limit <= 2 {
        return Vec::new();
    }
    if limit == 3 {
        return vec![2];
    }
    let count = odd_count_below(limit);
    let mut composite = vec![0u64; count.div_ceil(64)];

    let mut i = 0usize;
    loop {
        let p = 2 * i as u64 + 3;
        if p * p >= limit {
            break;
        }
        if composite[i >> 6] & (1 << (i & 63)) == 0 {
            // start at p², step 2p (i.e. p in index space)
            let mut j = ((p * p - 3) / 2) as usize;
            while j < count {
                composite[j >> 6] |= 1 << (j & 63);
                j += p as usize;
            }
        }
        i += 1;
    }

    let mut primes = Vec::with_capacity(estimate_prime_count(limit));
    primes.push(2);
    for (w, &word) in composite.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let bit = free.trailing_zeros() as usize;
            let idx = (w << 6) + bit;
            if idx >= count {
                break;
            }
            primes.push(2 * idx as u64 + 3);
            free &= free - 1;
        }
    }
    primes
}

/// Number of odd integers in `[3, limit)`.
fn odd_count_below(limit: u64) -> usize {
    if limit <= 3 {
        0
    } else {
        ((limit - 2) / 2) as usize
    }
}

fn estimate_prime_count(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize + 8
    }
}
