//! Deterministic random numbers for the experiment harness.
//!
//! A SplitMix64 generator with per-trial streams keyed by (seed, stream
//! index). Every operation is integer arithmetic plus a fixed Box-Muller
//! transform, so sequences are bitwise reproducible across platforms, which
//! the replication contract values over raw throughput.

const GAMMA: u64 = 0x9E3779B97F4A7C15;
const MIX1: u64 = 0xBF58476D1CE4E5B9;
const MIX2: u64 = 0x94D049BB133111EB;

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(MIX1);
    z ^= z >> 27;
    z = z.wrapping_mul(MIX2);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// An independent stream for a (seed, index) pair.
    ///
    /// The index is scrambled into the state rather than added, so distinct
    /// streams land far apart instead of overlapping the base sequence
    /// shifted by a few steps.
    pub fn from_stream(seed: u64, stream: u64) -> Self {
        SplitMix64 {
            state: mix(seed ^ stream.wrapping_mul(MIX1)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw on (0, 1].
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        (r * phi.cos(), r * phi.sin())
    }
}
