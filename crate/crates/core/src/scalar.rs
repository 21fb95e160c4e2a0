//! Scalar abstraction for the numeric kernels.
//!
//! Everything probabilistic in this crate (engines, likelihoods, features,
//! forests) is generic over [`Real`], so the whole pipeline runs at `f32` or
//! `f64`. Sampling helpers live on the trait because the rand distributions
//! are not themselves object-safe over the float type.

use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + rand::distributions::uniform::SampleUniform
    + serde::Serialize
    + serde::de::DeserializeOwned
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Uniform draw from `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal draw.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossless-enough conversion from `f64` for constants and config values.
    fn from_config(x: f64) -> Self {
        Self::from_f64(x).expect("finite config value")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }
}

impl Real for f64 {
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f32 {
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn unit_draws_stay_in_range() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = <f32 as Real>::unit(&mut rng);
            assert!((0.0..1.0).contains(&x));
            let y = <f64 as Real>::unit(&mut rng);
            assert!((0.0..1.0).contains(&y));
        }
    }
}
