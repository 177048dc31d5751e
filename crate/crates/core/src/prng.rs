//! MT19937 Mersenne Twister, the only source of randomness in the crate.
//!
//! Every stochastic routine takes a [`RandomSource`] so that a run is fully
//! determined by its seed. The draw order of each routine is documented on the
//! routine itself and is part of its contract.

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// Uniform random draws derived from a stream of 32-bit words.
pub trait RandomSource {
    fn next_u32(&mut self) -> u32;

    /// Next word divided by 2^32, in `[0, 1)`.
    fn next_unit(&mut self) -> f64 {
        f64::from(self.next_u32()) / 4_294_967_296.0
    }

    /// `2 * next_unit() - 1`, in `[-1, 1)`.
    fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_unit() - 1.0
    }
}

/// Seedable MT19937 generator (32-bit, `init_genrand` seeding).
#[derive(Clone)]
pub struct Prng {
    state: [u32; N],
    index: usize,
    seed: u32,
}

impl Prng {
    pub fn new(seed: u32) -> Self {
        let mut state = [0u32; N];
        state[0] = seed;
        for i in 1..N {
            let prev = state[i - 1];
            state[i] = 1_812_433_253u32
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Prng {
            state,
            index: N,
            seed,
        }
    }

    pub fn seed(&self) -> u32 {
        self.seed
    }

    fn twist(&mut self) {
        for i in 0..N {
            let y = (self.state[i] & UPPER_MASK) | (self.state[(i + 1) % N] & LOWER_MASK);
            let mut next = self.state[(i + M) % N] ^ (y >> 1);
            if y & 1 != 0 {
                next ^= MATRIX_A;
            }
            self.state[i] = next;
        }
        self.index = 0;
    }
}

impl RandomSource for Prng {
    fn next_u32(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;

        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }
}

impl std::fmt::Debug for Prng {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Prng")
            .field("seed", &self.seed)
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

impl PartialEq for Prng {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.seed == other.seed && self.state[..] == other.state[..]
    }
}
