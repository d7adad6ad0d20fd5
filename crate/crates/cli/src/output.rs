//! Time-series CSV and verdict report formats.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Undefined values (`I1` and `lambda` when
//! `q <= 0`) are written as `NaN`. A run stopped by a vanishing `q` ends with
//! a `# q_crossing,...` comment line.

use kirchhoff_core::{eval_i1, eval_i2, eval_i3, eval_q, InvariantParams, Params, SpectralMoments};

use crate::error::RunError;

pub const CSV_HEADER: [&str; 17] = [
    "t", "I1", "I2", "I3", "lambda", "Q", "q", "s", "s_prime", "s_second", "norm_v0", "norm_v1", "norm_v2", "norm_w1",
    "norm_w2", "norm_w3", "cross4",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Crossing time and the `q` seen when it was detected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub t: f64,
    pub q: f64,
}

pub fn write_timeseries(
    series: &[SpectralMoments],
    params: &Params,
    inv: &InvariantParams,
    crossing: Option<CrossingEvent>,
) -> Result<String, RunError> {
    let mut out = String::new();
    out.push_str(&CSV_HEADER.join(","));
    out.push('\n');
    for m in series {
        let lambda = if m.q > 0.0 { m.lambda } else { f64::NAN };
        let row = [
            m.t,
            eval_i1(m, params).unwrap_or(f64::NAN),
            eval_i2(m, params).map_err(kirchhoff_core::VerifyError::from)?,
            eval_i3(m, params).map_err(kirchhoff_core::VerifyError::from)?,
            lambda,
            eval_q(m, params, inv).map_err(kirchhoff_core::VerifyError::from)?,
            m.q,
            m.s,
            m.s1,
            m.s2,
            m.norm_v[0],
            m.norm_v[1],
            m.norm_v[2],
            m.norm_w[1],
            m.norm_w[2],
            m.norm_w[3],
            m.cross4,
        ];
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(e) = crossing {
        out.push_str(&format!("# q_crossing,t={},q={}\n", fmt_f64(e.t), fmt_f64(e.q)));
    }
    Ok(out)
}

/// Moments recovered from a time series. `norm_w[0]` is not stored and comes
/// back as `NaN`; no functional or check reads it.
pub fn read_timeseries(text: &str, params: &Params) -> Result<(Vec<SpectralMoments>, Option<CrossingEvent>), RunError> {
    let bad = |msg: String| RunError::Series(msg);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(bad("unexpected header".into()));
    }
    let mut series = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let mut v = [0.0f64; 17];
        for (slot, cell) in v.iter_mut().zip(record.iter()) {
            *slot = cell
                .parse()
                .map_err(|_| bad(format!("row {}: cannot parse `{cell}`", i + 1)))?;
        }
        let [t, _i1, _i2, _i3, _lambda, _q_inv, q, s, s1, s2, nv0, nv1, nv2, nw1, nw2, nw3, cross4] = v;
        series.push(SpectralMoments {
            t,
            s,
            s1,
            s2,
            q,
            q1: params.a * s1,
            q2: params.a * s2,
            lambda: q * nv0 + nw1 / q,
            norm_w: [f64::NAN, nw1, nw2, nw3],
            norm_v: [nv0, nv1, nv2],
            cross4,
        });
    }
    let crossing = text
        .lines()
        .filter_map(|l| l.strip_prefix("# q_crossing,"))
        .next_back()
        .map(|rest| {
            let mut t = f64::NAN;
            let mut q = f64::NAN;
            for part in rest.split(',') {
                match part.split_once('=') {
                    Some(("t", x)) => t = x.parse().unwrap_or(f64::NAN),
                    Some(("q", x)) => q = x.parse().unwrap_or(f64::NAN),
                    _ => {}
                }
            }
            CrossingEvent { t, q }
        });
    Ok((series, crossing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kirchhoff_core::{compute_moments, make_torus_lattice, Complex64, SpectralState};

    fn sample_series(p: &Params) -> Vec<SpectralMoments> {
        let lat = make_torus_lattice(1, 2).unwrap();
        (0..3)
            .map(|k| {
                let w = (0..lat.len())
                    .map(|i| Complex64::new(0.1 * (i + k) as f64 / 3.0, -0.02 * i as f64))
                    .collect();
                let v = (0..lat.len()).map(|i| Complex64::new(0.01, 0.03 * i as f64)).collect();
                let mut m = compute_moments(&SpectralState::new(0.0, w, v).unwrap(), &lat, p).unwrap();
                m.t = 0.1 * k as f64 + 1.0 / 3.0;
                m
            })
            .collect()
    }

    #[test]
    fn timeseries_round_trips_exactly() {
        let p = Params::new(0.5, 1.0).unwrap();
        let series = sample_series(&p);
        let inv = InvariantParams::new(0.7, -0.3);
        let text = write_timeseries(&series, &p, &inv, None).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let (back, crossing) = read_timeseries(&text, &p).unwrap();
        assert!(crossing.is_none());
        for (x, y) in series.iter().zip(&back) {
            let mut y = *y;
            y.norm_w[0] = x.norm_w[0];
            assert_eq!(*x, y);
        }
        assert_eq!(write_timeseries(&back, &p, &inv, None).unwrap(), text);
    }

    #[test]
    fn crossing_line_round_trips() {
        let p = Params::new(0.5, 1.0).unwrap();
        let series = sample_series(&p);
        let event = CrossingEvent { t: 0.1 + 0.2, q: -3e-7 };
        let text = write_timeseries(&series, &p, &InvariantParams::I3, Some(event)).unwrap();
        assert!(text.ends_with(&format!("# q_crossing,t={},q={}\n", fmt_f64(event.t), fmt_f64(event.q))));
        let (back, crossing) = read_timeseries(&text, &p).unwrap();
        assert_eq!(back.len(), series.len());
        assert_eq!(crossing, Some(event));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn undefined_columns_are_nan() {
        let p = Params::new(-1.0, 1.0).unwrap();
        let lat = make_torus_lattice(1, 1).unwrap();
        let w = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.5, 0.0),
        ];
        let m = compute_moments(
            &SpectralState::new(0.0, w, vec![Complex64::new(0.0, 0.0); 3]).unwrap(),
            &lat,
            &p,
        )
        .unwrap();
        assert!(m.q < 0.0);
        let text = write_timeseries(&[m], &p, &InvariantParams::I3, None).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[1], "NaN");
        assert_eq!(row[4], "NaN");
        let (back, _) = read_timeseries(&text, &p).unwrap();
        assert_eq!(back[0].q, m.q);
    }
}
