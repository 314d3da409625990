//! Shared tolerance policy for workload/delay comparisons: relative 1e-9
//! with an absolute floor of 1e-12.

/// Relative tolerance applied to all workload and delay comparisons.
pub const REL_TOL: f64 = 1e-9;

/// Absolute floor below which relative tolerances bottom out.
pub const ABS_FLOOR: f64 = 1e-12;

/// Comparison tolerance for a quantity of magnitude `scale`.
pub fn tol_for(scale: f64) -> f64 {
    (REL_TOL * scale.abs()).max(ABS_FLOOR)
}

/// `a == b` up to the shared tolerance.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol_for(a.abs().max(b.abs()))
}

/// `a >= b` up to the shared tolerance.
pub fn approx_ge(a: f64, b: f64) -> bool {
    a >= b - tol_for(a.abs().max(b.abs()))
}

/// `a <= b` up to the shared tolerance.
pub fn approx_le(a: f64, b: f64) -> bool {
    b >= a - tol_for(a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_scales_with_magnitude() {
        assert!(approx_eq(1e12, 1e12 + 1.0));
        assert!(!approx_eq(1.0, 1.0 + 1e-6));
        assert!(approx_eq(0.0, 1e-13));
    }

    #[test]
    fn ge_and_le_admit_slack() {
        assert!(approx_ge(1.0 - 1e-12, 1.0));
        assert!(!approx_ge(0.9, 1.0));
        assert!(approx_le(1.0 + 1e-12, 1.0));
    }
}
