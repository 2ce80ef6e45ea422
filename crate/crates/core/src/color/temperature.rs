//! Correlated color temperature on the Planckian locus.
//!
//! The locus is the Robertson table in CIE 1960 (u, v), sampled in mired and
//! interpolated linearly in mired between entries. Chromaticities are kept on
//! the locus (no tint axis), so the inverse maps a point to the nearest spot
//! on that same piecewise-linear curve.

use super::xy::XyCoord;
use crate::error::{Error, Result};

pub const MIN_KELVIN: f64 = 1667.0;
pub const MAX_KELVIN: f64 = 25000.0;

/// (mired, u, v, isotemperature slope)
const ROBERTSON: [(f64, f64, f64, f64); 31] = [
    (0.0, 0.18006, 0.26352, -0.24341),
    (10.0, 0.18066, 0.26589, -0.25479),
    (20.0, 0.18133, 0.26846, -0.26876),
    (30.0, 0.18208, 0.27119, -0.28539),
    (40.0, 0.18293, 0.27407, -0.30470),
    (50.0, 0.18388, 0.27709, -0.32675),
    (60.0, 0.18494, 0.28021, -0.35156),
    (70.0, 0.18611, 0.28342, -0.37915),
    (80.0, 0.18740, 0.28668, -0.40955),
    (90.0, 0.18880, 0.28997, -0.44278),
    (100.0, 0.19032, 0.29326, -0.47888),
    (125.0, 0.19462, 0.30141, -0.58204),
    (150.0, 0.19962, 0.30921, -0.70471),
    (175.0, 0.20525, 0.31647, -0.84901),
    (200.0, 0.21142, 0.32312, -1.0182),
    (225.0, 0.21807, 0.32909, -1.2168),
    (250.0, 0.22511, 0.33439, -1.4512),
    (275.0, 0.23247, 0.33904, -1.7298),
    (300.0, 0.24010, 0.34308, -2.0637),
    (325.0, 0.24792, 0.34655, -2.4681),
    (350.0, 0.25591, 0.34951, -2.9641),
    (375.0, 0.26400, 0.35200, -3.5814),
    (400.0, 0.27218, 0.35407, -4.3633),
    (425.0, 0.28039, 0.35577, -5.3762),
    (450.0, 0.28863, 0.35714, -6.7262),
    (475.0, 0.29685, 0.35823, -8.5955),
    (500.0, 0.30505, 0.35907, -11.324),
    (525.0, 0.31320, 0.35968, -15.628),
    (550.0, 0.32129, 0.36011, -23.325),
    (575.0, 0.32931, 0.36038, -40.770),
    (600.0, 0.33724, 0.36051, -116.45),
];

fn uv_to_xy(u: f64, v: f64) -> XyCoord {
    let d = u - 4.0 * v + 2.0;
    XyCoord {
        x: 1.5 * u / d,
        y: v / d,
    }
}

fn xy_to_uv(xy: XyCoord) -> (f64, f64) {
    let d = 1.5 - xy.x + 6.0 * xy.y;
    (2.0 * xy.x / d, 3.0 * xy.y / d)
}

fn locus_uv(mired: f64) -> (f64, f64) {
    let last = ROBERTSON.len() - 2;
    let i = ROBERTSON
        .windows(2)
        .position(|w| mired < w[1].0)
        .unwrap_or(last)
        .min(last);
    let (r0, u0, v0, _) = ROBERTSON[i];
    let (r1, u1, v1, _) = ROBERTSON[i + 1];
    let f = (r1 - mired) / (r1 - r0);
    (u0 * f + u1 * (1.0 - f), v0 * f + v1 * (1.0 - f))
}

/// Planckian chromaticity for a temperature in [1667, 25000] K.
pub fn temperature_to_xy(kelvin: f64) -> Result<XyCoord> {
    if !(MIN_KELVIN..=MAX_KELVIN).contains(&kelvin) {
        return Err(Error::TemperatureOutOfRange(kelvin));
    }
    let (u, v) = locus_uv(1.0e6 / kelvin);
    Ok(uv_to_xy(u, v))
}

/// Mired (1e6 / K) of the locus point nearest to `xy` in (u, v).
pub fn xy_to_mired(xy: XyCoord) -> f64 {
    let (u, v) = xy_to_uv(xy);
    let mut best = (f64::INFINITY, 0.0);
    for w in ROBERTSON.windows(2) {
        let (r0, u0, v0, _) = w[0];
        let (r1, u1, v1, _) = w[1];
        let (du, dv) = (u1 - u0, v1 - v0);
        let t = (((u - u0) * du + (v - v0) * dv) / (du * du + dv * dv)).clamp(0.0, 1.0);
        let (pu, pv) = (u0 + t * du, v0 + t * dv);
        let dist = (u - pu).powi(2) + (v - pv).powi(2);
        if dist < best.0 {
            best = (dist, r0 + t * (r1 - r0));
        }
    }
    best.1
}

/// Correlated color temperature in kelvin; clamped to 1e6 K at the blue end.
pub fn xy_to_temperature(xy: XyCoord) -> f64 {
    1.0e6 / xy_to_mired(xy).max(1.0)
}

/// Candidate temperatures for the white-point search: every integer mired
/// whose temperature lies in [MIN_KELVIN, MAX_KELVIN].
pub fn mired_grid() -> impl Iterator<Item = f64> {
    let lo = (1.0e6 / MAX_KELVIN).ceil() as u32;
    let hi = (1.0e6 / MIN_KELVIN).floor() as u32;
    (lo..=hi).map(f64::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Kim et al. cubic-spline fit of the Planckian locus, independent of the
    /// Robertson table.
    fn kim_planckian(t: f64) -> (f64, f64) {
        let x = if t <= 4000.0 {
            -0.2661239e9 / t.powi(3) - 0.2343589e6 / t.powi(2) + 0.8776956e3 / t + 0.179910
        } else {
            -3.0258469e9 / t.powi(3) + 2.1070379e6 / t.powi(2) + 0.2226347e3 / t + 0.240390
        };
        let y = if t <= 2222.0 {
            -1.1063814 * x.powi(3) - 1.34811020 * x.powi(2) + 2.18555832 * x - 0.20219683
        } else if t <= 4000.0 {
            -0.9549476 * x.powi(3) - 1.37418593 * x.powi(2) + 2.09137015 * x - 0.16748867
        } else {
            3.0817580 * x.powi(3) - 5.87338670 * x.powi(2) + 3.75112997 * x - 0.37001483
        };
        (x, y)
    }

    #[test]
    fn five_thousand_kelvin_on_locus() {
        let xy = temperature_to_xy(5000.0).unwrap();
        let (x, y) = kim_planckian(5000.0);
        assert!((xy.x - x).abs() < 0.002 && (xy.y - y).abs() < 0.002, "{xy:?}");
        // D50 sits above the locus; only x is close.
        assert!((xy.x - 0.3457).abs() < 0.002);
    }

    #[test]
    fn agrees_with_spline_fit_everywhere() {
        let mut t = MIN_KELVIN;
        while t <= MAX_KELVIN {
            let xy = temperature_to_xy(t).unwrap();
            let (x, y) = kim_planckian(t);
            assert!((xy.x - x).abs() < 0.002 && (xy.y - y).abs() < 0.002, "{t} K: {xy:?} vs ({x}, {y})");
            t *= 1.01;
        }
    }

    #[test]
    fn x_decreases_with_temperature() {
        let mut prev = f64::INFINITY;
        for k in (2000..=10000).step_by(10) {
            let x = temperature_to_xy(k as f64).unwrap().x;
            assert!(x < prev, "{k}");
            prev = x;
        }
    }

    #[test]
    fn brute_force_inverse_within_one_percent() {
        // Nearest-kelvin sweep in xy, independent of the projection.
        let grid: Vec<(f64, XyCoord)> = (1667..=25000)
            .step_by(3)
            .map(|k| (k as f64, temperature_to_xy(k as f64).unwrap()))
            .collect();
        for k in [1700.0, 2856.0, 3500.0, 5003.0, 6504.0, 9000.0, 15000.0] {
            let xy = temperature_to_xy(k).unwrap();
            let nearest = grid
                .iter()
                .min_by(|a, b| {
                    let da = (a.1.x - xy.x).powi(2) + (a.1.y - xy.y).powi(2);
                    let db = (b.1.x - xy.x).powi(2) + (b.1.y - xy.y).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap()
                .0;
            assert!((nearest - k).abs() / k < 0.01, "{k} -> {nearest}");
            assert!((xy_to_temperature(xy) - k).abs() / k < 1e-9);
        }
    }

    #[test]
    fn out_of_range() {
        assert!(temperature_to_xy(1000.0).is_err());
        assert!(temperature_to_xy(30000.0).is_err());
    }

    #[test]
    fn grid_bounds() {
        let g: Vec<f64> = mired_grid().collect();
        assert_eq!(g.first(), Some(&40.0));
        assert_eq!(g.last(), Some(&599.0));
        assert!(g.iter().all(|m| (MIN_KELVIN..=MAX_KELVIN).contains(&(1e6 / m))));
    }
}
