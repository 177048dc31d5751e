//! Test-only oracles, coded independently of the library's implementations.
#![allow(dead_code)]

/// MT19937 written after the original C reference (`genrand_int32` with the
/// `mag01` table and the two-phase twist), not after the library code.
pub struct ReferenceMt {
    mt: Vec<u32>,
    mti: usize,
}

impl ReferenceMt {
    pub fn new(s: u32) -> Self {
        let mut mt = vec![0u32; 624];
        mt[0] = s;
        let mut mti = 1;
        while mti < 624 {
            let prev = mt[mti - 1] as u64;
            mt[mti] =
                ((1_812_433_253u64 * (prev ^ (prev >> 30)) + mti as u64) & 0xffff_ffff) as u32;
            mti += 1;
        }
        ReferenceMt { mt, mti }
    }

    pub fn genrand_int32(&mut self) -> u32 {
        const N: usize = 624;
        const M: usize = 397;
        let mag01 = [0u32, 0x9908_b0df];
        if self.mti >= N {
            let mut kk = 0;
            while kk < N - M {
                let y = (self.mt[kk] & 0x8000_0000) | (self.mt[kk + 1] & 0x7fff_ffff);
                self.mt[kk] = self.mt[kk + M] ^ (y >> 1) ^ mag01[(y & 1) as usize];
                kk += 1;
            }
            while kk < N - 1 {
                let y = (self.mt[kk] & 0x8000_0000) | (self.mt[kk + 1] & 0x7fff_ffff);
                self.mt[kk] = self.mt[kk + M - N] ^ (y >> 1) ^ mag01[(y & 1) as usize];
                kk += 1;
            }
            let y = (self.mt[N - 1] & 0x8000_0000) | (self.mt[0] & 0x7fff_ffff);
            self.mt[N - 1] = self.mt[M - 1] ^ (y >> 1) ^ mag01[(y & 1) as usize];
            self.mti = 0;
        }
        let mut y = self.mt[self.mti];
        self.mti += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }
}

/// First 1000 outputs for seed 5489, frozen from NumPy's legacy MT19937.
pub fn numpy_fixture() -> Vec<u32> {
    include_str!("../data/mt19937_seed5489_first1000.txt")
        .lines()
        .map(|l| l.trim().parse().unwrap())
        .collect()
}

/// Forward pass straight from the flat canonical parameter vector: for each
/// layer, neuron `j` reads `inputs` weights then one bias.
pub fn brute_force_forward(sizes: &[usize], params: &[f64], input: &[f64]) -> Vec<f64> {
    let mut act = input.to_vec();
    let mut offset = 0;
    for l in 1..sizes.len() {
        let (n_in, n_out) = (sizes[l - 1], sizes[l]);
        let mut next = Vec::with_capacity(n_out);
        for j in 0..n_out {
            let base = offset + j * (n_in + 1);
            let mut z = 0.0;
            for (i, a) in act.iter().enumerate() {
                z += params[base + i] * a;
            }
            z += params[base + n_in];
            next.push(z.tanh());
        }
        offset += n_out * (n_in + 1);
        act = next;
    }
    assert_eq!(offset, params.len());
    act
}
