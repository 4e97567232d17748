use std::f64::consts::PI;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 stream with Box–Muller gaussians.
///
/// Each Box–Muller transform consumes two uniforms and yields two normals; the
/// second is held and returned by the next gaussian request, so the stream
/// position after `k` gaussian draws is always `2 * ceil(k / 2)` uniforms.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    spare: Option<f64>,
    uniforms_drawn: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, spare: None, uniforms_drawn: 0 }
    }

    /// Independent stream for run `index` under a master seed.
    pub fn derive(master: u64, index: u64) -> Self {
        let mut mixer = Self::new(master ^ index.wrapping_mul(GOLDEN_GAMMA));
        Self::new(mixer.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on (0, 1] with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        self.uniforms_drawn += 1;
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi].
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.uniforms_drawn += 1;
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal draw.
    pub fn std_gauss(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Draw from N(mean, sd²); `sd == 0` returns `mean` exactly without
    /// advancing the stream.
    pub fn gauss(&mut self, mean: f64, sd: f64) -> f64 {
        debug_assert!(sd >= 0.0);
        if sd == 0.0 {
            return mean;
        }
        mean + sd * self.std_gauss()
    }

    /// Number of uniform draws consumed so far.
    pub fn position(&self) -> u64 {
        self.uniforms_drawn
    }

    /// `k` distinct indices from `0..n`, ascending (Floyd's algorithm).
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut chosen = std::collections::BTreeSet::new();
        for j in (n - k)..n {
            let t = self.below(j + 1);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        chosen.into_iter().collect()
    }
}
