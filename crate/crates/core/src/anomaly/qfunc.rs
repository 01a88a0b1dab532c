/// Gaussian upper-tail probability `Q(x) = P(Z > x)`, via
/// `Q(x) = erfc(x / sqrt(2)) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
