//! Shared fixtures for the benchmarks.

/// Minimum of [`sphere`].
pub const SPHERE_CENTER: [f64; 4] = [0.3, -0.5, 0.7, 0.1];

/// `‖x − c‖²` in four dimensions.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().zip(&SPHERE_CENTER).map(|(a, c)| (a - c) * (a - c)).sum()
}

#[cfg(test)]
mod tests {
    #[test]
    fn sphere_vanishes_at_center() {
        assert_eq!(super::sphere(&super::SPHERE_CENTER), 0.0);
    }
}
