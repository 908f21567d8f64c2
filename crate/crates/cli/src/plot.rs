//! Minimal self-contained SVG line charts for sweep results.

use simo_core::harness::SweepRecord;
use simo_core::Scheme;
use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Ber,
    NominalRate,
    BscEqRate,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::Ber => "BER",
            Metric::NominalRate => "nominal rate [bit/symbol period]",
            Metric::BscEqRate => "BSC-equivalent rate [bit/symbol period]",
        }
    }

    fn value(self, r: &SweepRecord) -> f64 {
        match self {
            Metric::Ber => r.ber,
            Metric::NominalRate => r.nominal_rate,
            Metric::BscEqRate => r.bsc_eq_rate,
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ber" => Ok(Metric::Ber),
            "nominal_rate" => Ok(Metric::NominalRate),
            "bsc_eq_rate" => Ok(Metric::BscEqRate),
            other => Err(format!("unknown metric '{other}' (ber, nominal_rate, bsc_eq_rate)")),
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Clone, Copy)]
struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { log, lo, hi }
    }

    /// Position in [0, 1].
    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            (self.lo as i32..=self.hi as i32).map(|k| 10f64.powi(k)).collect()
        } else {
            (0..=5).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0).collect()
        }
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        let k = v.log10().round() as i32;
        if (0..=4).contains(&k) {
            format!("{}", 10f64.powi(k))
        } else {
            format!("1e{k}")
        }
    } else if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn colour(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Em => "#1f77b4",
        Scheme::Fem => "#d62728",
        Scheme::Pa => "#2ca02c",
    }
}

/// Rates are drawn log-log; BER on a logarithmic y axis against linear N.
/// Zero BER is clamped to `1 / (2 symbols)` so it stays on the log axis.
pub fn render(records: &[SweepRecord], metric: Metric, symbols: usize) -> String {
    let floor = 1.0 / (2.0 * symbols as f64);
    let mut series: BTreeMap<Scheme, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        let mut y = metric.value(r);
        if metric == Metric::Ber {
            y = y.max(floor);
        }
        if y > 0.0 {
            series.entry(r.scheme).or_default().push((r.n as f64, y));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let x_axis = Axis::fit(series.values().flatten().map(|p| p.0), metric != Metric::Ber);
    let y_axis = Axis::fit(series.values().flatten().map(|p| p.1), true);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x_axis.unit(x) * plot_w;
    let py = |y: f64| TOP + (1.0 - y_axis.unit(y)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for t in x_axis.ticks() {
        let x = px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            TOP + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            tick_label(t, x_axis.log)
        );
    }
    for t in y_axis.ticks() {
        let y = py(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t, true)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">N (receive antennas)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        metric.label()
    );

    for (i, (scheme, pts)) in series.iter().enumerate() {
        let c = colour(*scheme);
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-scheme="{scheme}" fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = TOP + 20.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            scheme.name().to_uppercase()
        );
    }
    if metric == Metric::Ber {
        let _ = writeln!(
            svg,
            r#"<text class="floor" x="{:.2}" y="{:.2}" font-size="10">BER = 0 drawn at 1/(2*{symbols}) = {floor:e}</text>"#,
            LEFT + plot_w + 16.0,
            TOP + 20.0 + 20.0 * series.len() as f64 + 10.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(scheme: Scheme, n: usize, ber: f64) -> SweepRecord {
        SweepRecord {
            scheme,
            n,
            b: 2,
            l: 1,
            m: 2,
            k: 2,
            ber,
            nominal_rate: 2.0,
            bsc_eq_rate: 2.0 * (1.0 - simo_core::numerics::binary_entropy(ber).unwrap()),
            seed: 0,
        }
    }

    #[test]
    fn one_polyline_per_scheme() {
        let records: Vec<_> = Scheme::ALL
            .iter()
            .flat_map(|&s| [16, 64, 256].map(|n| rec(s, n, 0.01)))
            .collect();
        let svg = render(&records, Metric::BscEqRate, 10_000);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn zero_ber_is_clamped_and_documented() {
        let records = vec![rec(Scheme::Em, 16, 0.0), rec(Scheme::Em, 64, 0.1)];
        let svg = render(&records, Metric::Ber, 10_000);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("1/(2*10000) = 5e-5"));
    }

    #[test]
    fn metric_names() {
        assert_eq!("ber".parse::<Metric>().unwrap(), Metric::Ber);
        assert!("throughput".parse::<Metric>().is_err());
    }
}
