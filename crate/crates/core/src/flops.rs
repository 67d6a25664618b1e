//! Floating point operation accounting.
//!
//! Additions (and subtractions), multiplications and divisions are tallied
//! separately. Calls to `exp`, `ln`, `atan` and friends inside device models
//! count as one transcendental unit each rather than being expanded into
//! their polynomial kernels. Comparisons, pivot searches and index
//! arithmetic are not counted.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlopCounter {
    pub adds: u64,
    pub muls: u64,
    pub divs: u64,
    pub transcendentals: u64,
}

impl FlopCounter {
    pub const ZERO: FlopCounter = FlopCounter::new(0, 0, 0, 0);

    pub const fn new(adds: u64, muls: u64, divs: u64, transcendentals: u64) -> Self {
        FlopCounter {
            adds,
            muls,
            divs,
            transcendentals,
        }
    }

    pub fn total(&self) -> u64 {
        self.adds + self.muls + self.divs + self.transcendentals
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.adds += n;
    }

    #[inline]
    pub fn mul(&mut self, n: u64) {
        self.muls += n;
    }

    #[inline]
    pub fn div(&mut self, n: u64) {
        self.divs += n;
    }

    #[inline]
    pub fn transcendental(&mut self, n: u64) {
        self.transcendentals += n;
    }

    #[inline]
    pub fn charge(&mut self, cost: FlopCounter) {
        *self += cost;
    }
}

impl AddAssign for FlopCounter {
    fn add_assign(&mut self, rhs: FlopCounter) {
        self.adds += rhs.adds;
        self.muls += rhs.muls;
        self.divs += rhs.divs;
        self.transcendentals += rhs.transcendentals;
    }
}

impl Add for FlopCounter {
    type Output = FlopCounter;

    fn add(mut self, rhs: FlopCounter) -> FlopCounter {
        self += rhs;
        self
    }
}

impl Mul<u64> for FlopCounter {
    type Output = FlopCounter;

    fn mul(self, k: u64) -> FlopCounter {
        FlopCounter::new(
            self.adds * k,
            self.muls * k,
            self.divs * k,
            self.transcendentals * k,
        )
    }
}

impl fmt::Display for FlopCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} flops ({} add, {} mul, {} div, {} transcendental)",
            self.total(),
            self.adds,
            self.muls,
            self.divs,
            self.transcendentals
        )
    }
}
