use crate::{Error, Result};

/// Seeded 64-bit generator with a splitmix64 state transition.
///
/// Every stream in the pipeline goes through this type; no platform RNG
/// is used anywhere, so identical seeds give identical streams on every
/// platform. The raw stream is the standard splitmix64 sequence:
/// `state += 0x9E3779B97F4A7C15` followed by two xor-shift multiplies.
///
/// Gaussian draws use the Box-Muller transform. Each transform consumes
/// exactly two uniform draws and produces two standard normals; the second
/// is cached and returned by the next call, so a pair of `next_gaussian`
/// calls costs two uniform draws total. `fork` invalidates the cache.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed, cached_gaussian: None }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n).
    pub fn next_below(&mut self, n: u64) -> u64 {
        // Modulo bias is < 2^-40 for the n used here (tiny ranges); fine.
        self.next_u64() % n
    }

    /// Standard normal draw via Box-Muller.
    ///
    /// Consumes two uniform draws per pair of values; the second value of
    /// each pair is cached and returned by the following call.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(cached) = self.cached_gaussian.take() {
            return cached;
        }
        // Shift u1 into (0, 1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Derive an independent child stream for item `index`.
    ///
    /// The child seed is the splitmix64 mix of `state ^ (index + 1)`, so
    /// children of the same parent never collide for distinct indices.
    pub fn fork(&self, index: u64) -> Rng {
        let mut mixer = Rng::new(self.state ^ index.wrapping_add(1).wrapping_mul(0xD1B54A32D192ED03));
        let seed = mixer.next_u64();
        Rng::new(seed)
    }

    /// Current raw state; for a fresh generator this is its seed.
    pub fn state(&self) -> u64 {
        self.state
    }
}

/// Gaussian sample with mean `mu` and standard deviation `sigma`.
///
/// `sigma == 0` returns exactly `mu` (the transform multiplies the unit
/// normal by zero) while still consuming the usual uniform draws.
pub fn gaussian_sample(rng: &mut Rng, mu: f64, sigma: f64) -> Result<f64> {
    if sigma < 0.0 {
        return Err(Error::Parameter(format!("gaussian_sample: sigma must be >= 0, got {sigma}")));
    }
    Ok(mu + sigma * rng.next_gaussian())
}
