use crate::error::{Error, Result};

/// sRGB gamma encode for linear x >= 0.
pub fn encode_srgb(x: f64) -> f64 {
    if x <= 0.0031308 {
        12.92 * x
    } else {
        1.055 * x.powf(1.0 / 2.4) - 0.055
    }
}

/// Inverse of [`encode_srgb`] on [0, 1].
pub fn srgb_to_linear(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("sRGB value {v} outside [0, 1]")));
    }
    Ok(if v <= 0.040_448_236_277_107_6 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(srgb_to_linear(0.0).unwrap(), 0.0);
        assert!((srgb_to_linear(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(srgb_to_linear(1.2).is_err());
        assert!(srgb_to_linear(-0.1).is_err());
    }

    #[test]
    fn target_gray() {
        let tau = srgb_to_linear(0.4).unwrap();
        assert!((tau - (0.455f64 / 1.055).powf(2.4)).abs() < 1e-15);
        assert!((tau - 0.1329).abs() < 1e-4);
    }

    #[test]
    fn round_trip() {
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            assert!((srgb_to_linear(encode_srgb(x)).unwrap() - x).abs() < 1e-9, "{x}");
        }
    }
}
