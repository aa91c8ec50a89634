use crate::error::Result;
use crate::params::ModelParams;
use crate::special_fn::laguerre_real;

/// Finite-n chGUE density in the singular-value variable `y`, normalized to `2n`.
///
/// The zero mode at `nu = 1` is not included.
pub fn chgue_density_finite(y: f64, n: usize, nu: usize) -> Result<f64> {
    // only the index check is needed here
    ModelParams { n: n.max(1), nu, a: 0.5, m: 0.0 }.require_nu(&[0, 1])?;
    let u = y * y / 2.0;
    let g = (-u).exp();
    Ok(match nu {
        0 => y.abs() * g * (0..n).map(|l| laguerre_real(l, 0, u).powi(2)).sum::<f64>(),
        _ => {
            y.abs().powi(3)
                * g
                * (0..n)
                    .map(|l| laguerre_real(l, 1, u).powi(2) / (2.0 * (l + 1) as f64))
                    .sum::<f64>()
        }
    })
}

/// Maps a density in `y` to the density in `x = ±sqrt(y^2 + m^2)`; zero for `|x| <= m`.
pub fn shift_map<F: Fn(f64) -> f64>(density: F, m: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if x.abs() <= m {
            return 0.0;
        }
        if m == 0.0 {
            return density(x);
        }
        let y = (x * x - m * m).sqrt();
        x.abs() / y * density(y)
    }
}

/// `shift_map(chgue_density_finite)` at mass `m`.
pub fn shifted_chgue_density(x: f64, n: usize, nu: usize, m: f64) -> Result<f64> {
    chgue_density_finite(0.0, n, nu)?;
    Ok(shift_map(|y| chgue_density_finite(y, n, nu).unwrap_or(0.0), m)(x))
}
