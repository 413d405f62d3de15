use super::DesignError;

fn check(delta_f: f64, ripples: &[f64]) -> Result<(), DesignError> {
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(DesignError::InvalidSpec(format!(
            "normalized transition width must be positive, got {delta_f}"
        )));
    }
    if ripples.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(DesignError::InvalidSpec("ripples must lie in (0, 1)".into()));
    }
    Ok(())
}

/// FIR length estimate ceil(0.0714·(−10·log10(δp·δs) − 15)/Δf), at least 1.
pub fn estimate_fir_length(
    passband_ripple: f64,
    stopband_ripple: f64,
    delta_f: f64,
) -> Result<usize, DesignError> {
    check(delta_f, &[passband_ripple, stopband_ripple])?;
    let num = 0.0714 * (-10.0 * (passband_ripple * stopband_ripple).log10() - 15.0);
    let l = (num / delta_f).ceil();
    Ok(if l < 1.0 { 1 } else { l as usize })
}

/// Total all-pass coefficient count round(0.058·(−10·log10 δs − 10)/Δf).
///
/// Returns 0 when the attenuation is too small for the fit to be meaningful;
/// callers should treat that as an infeasible request.
pub fn estimate_iir_sections(stopband_ripple: f64, delta_f: f64) -> Result<usize, DesignError> {
    check(delta_f, &[stopband_ripple])?;
    let num = 0.058 * (-10.0 * stopband_ripple.log10() - 10.0);
    let l = (num / delta_f).round();
    Ok(if l <= 0.0 { 0 } else { l as usize })
}
