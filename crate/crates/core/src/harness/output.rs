//! CSV and SVG emission.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use super::config::Scale;
use super::run::RegretTrace;

pub const CSV_HEADER: &str =
    "run,t,realized_utility,expected_utility,cum_expected_regret,discretization_bound,price,allocation";

/// Significant digits for floating-point CSV fields.
const SIG_DIGITS: usize = 12;

/// Most points drawn per SVG series.
const MAX_PLOT_POINTS: usize = 400;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("no traces to write")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Formats like C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(traces: &[RegretTrace], mut out: W) -> Result<(), OutputError> {
    if traces.is_empty() {
        return Err(OutputError::Empty);
    }
    writeln!(out, "{CSV_HEADER}")?;
    for trace in traces {
        for r in &trace.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                trace.run,
                r.t,
                fmt_sig(r.realized_utility),
                fmt_sig(r.expected_utility),
                fmt_sig(r.cum_expected_regret),
                fmt_sig(r.discretization_bound),
                fmt_sig(r.price),
                r.allocation
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x` over points with both
/// coordinates positive.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Mean, minimum and maximum cumulative regret across traces at each round.
pub fn regret_envelope(traces: &[RegretTrace]) -> Vec<(f64, f64, f64, f64)> {
    let len = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let vals: Vec<f64> = traces
                .iter()
                .map(|t| t.rows[i].cum_expected_regret)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (traces[0].rows[i].t as f64, mean, lo, hi)
        })
        .collect()
}

pub fn write_svg<W: Write>(
    traces: &[RegretTrace],
    scale: Scale,
    mut out: W,
) -> Result<(), OutputError> {
    if traces.is_empty() || traces[0].rows.is_empty() {
        return Err(OutputError::Empty);
    }
    let envelope = regret_envelope(traces);
    let stride = envelope.len().div_ceil(MAX_PLOT_POINTS).max(1);
    let mut pts: Vec<_> = envelope.iter().copied().step_by(stride).collect();
    if pts.last() != envelope.last() {
        pts.push(*envelope.last().unwrap());
    }

    let log = scale == Scale::LogLog;
    let floor = pts
        .iter()
        .flat_map(|p| [p.1, p.2, p.3])
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let fy = |v: f64| if log { v.max(floor).log10() } else { v };
    let fx = |t: f64| if log { t.log10() } else { t };
    if log {
        pts.retain(|p| p.1 > 0.0);
    }

    let (w, h, m) = (720.0, 440.0, 60.0);
    let xs: Vec<f64> = pts.iter().map(|p| fx(p.0)).collect();
    let ys: Vec<f64> = pts.iter().flat_map(|p| [fy(p.2), fy(p.3)]).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {t} V{b} H{r}" stroke="black" fill="none"/>"#,
        t = m,
        b = h - m,
        r = w - m
    );

    if !pts.is_empty() {
        let mut band = String::new();
        for p in &pts {
            let _ = write!(band, "{:.2},{:.2} ", px(fx(p.0)), py(fy(p.3)));
        }
        for p in pts.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(fx(p.0)), py(fy(p.2)));
        }
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="steelblue" fill-opacity="0.25" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(fx(p.0)), py(fy(p.1))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            line.join(" ")
        );
    }

    let axis = |v: f64| {
        if log {
            fmt_sig(10f64.powf(v))
        } else {
            fmt_sig(v)
        }
    };
    let label = |svg: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        );
    };
    label(&mut svg, m, h - m + 18.0, "middle", &axis(x0));
    label(&mut svg, w - m, h - m + 18.0, "middle", &axis(x1));
    label(&mut svg, m - 6.0, h - m, "end", &axis(y0));
    label(&mut svg, m - 6.0, m + 4.0, "end", &axis(y1));
    label(&mut svg, w / 2.0, h - 16.0, "middle", "round t");
    label(
        &mut svg,
        w / 2.0,
        24.0,
        "middle",
        &format!(
            "cumulative expected regret, mean and range over {} runs",
            traces.len()
        ),
    );
    if log {
        let points: Vec<(f64, f64)> = envelope.iter().map(|p| (p.0, p.1)).collect();
        if let Some(slope) = fit_loglog_slope(&points) {
            label(
                &mut svg,
                w - m,
                m + 16.0,
                "end",
                &format!("slope {slope:.3}"),
            );
        }
    }
    svg.push_str("</svg>\n");
    out.write_all(svg.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
