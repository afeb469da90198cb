pub mod green;
pub mod kelvin;
pub mod mesh;
pub mod ode;
pub mod pde;
pub mod rigidity;
pub mod suite;

/// Largest absolute value, ignoring NaN.
pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().filter(|x| !x.is_nan()).fold(0.0, |m, x| m.max(x.abs()))
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}
