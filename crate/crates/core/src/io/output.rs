use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::{Format, OutputConfig};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::solver::Trajectory;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

/// Shortest round-trip safe form: 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header of `series.csv` for `n` species.
///
/// ```
/// assert_eq!(erds::io::series_header(2), "t,dt,H,E,m_1,m_2,G,cumP,cumRDh,min_u,dist_alpha");
/// ```
pub fn series_header(n: usize) -> String {
    let mut cols = vec!["t".to_string(), "dt".into(), "H".into(), "E".into()];
    cols.extend((1..=n).map(|i| format!("m_{i}")));
    cols.extend(["G", "cumP", "cumRDh", "min_u", "dist_alpha"].map(String::from));
    cols.join(",")
}

/// One row per step.
pub fn series_csv(traj: &Trajectory) -> String {
    let n = traj.dim - 1;
    let mut out = series_header(n);
    out.push('\n');
    for r in &traj.series {
        let mut fields = vec![num(r.t), num(r.dt), num(r.h), num(r.energy)];
        fields.extend(r.masses.iter().map(|m| num(*m)));
        fields.extend([num(r.g), num(r.cum_p), num(r.cum_rdh), num(r.min_u)]);
        fields.push(r.dist_alpha.map(num).unwrap_or_default());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Cell values of snapshot `k`: `x,u,c_1,…`.
pub fn snapshot_csv(traj: &Trajectory, k: usize) -> String {
    let s = &traj.states[k];
    let mut out = String::from("x,u");
    for i in 1..s.dim {
        let _ = write!(out, ",c_{i}");
    }
    out.push('\n');
    for j in 0..s.cells() {
        out.push_str(&num(s.grid.x(j)));
        for v in s.cell(j) {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
    out
}

/// Polyline plot of `log₁₀ Dist_α` when the series carries it, otherwise of
/// `log₁₀(H − min H)`, against `t`.
pub fn plot_svg(traj: &Trajectory) -> String {
    let has_dist = traj.series.iter().any(|r| r.dist_alpha.is_some());
    let (label, pts): (&str, Vec<(f64, f64)>) = if has_dist {
        (
            "log10 Dist_alpha",
            traj.series
                .iter()
                .filter_map(|r| r.dist_alpha.filter(|d| *d > 0.0).map(|d| (r.t, d.log10())))
                .collect(),
        )
    } else {
        let hmin = traj.series.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
        (
            "log10 (H - min H)",
            traj.series
                .iter()
                .filter(|r| r.h > hmin)
                .map(|r| (r.t, (r.h - hmin).log10()))
                .collect(),
        )
    };
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{pad}\" y=\"30\" font-family=\"sans-serif\" font-size=\"14\">{label} vs t</text>"
    );
    if pts.len() >= 2 {
        let (t0, t1) = (pts[0].0, pts[pts.len() - 1].0);
        let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let ys = if ymax > ymin { ymax - ymin } else { 1.0 };
        let ts = if t1 > t0 { t1 - t0 } else { 1.0 };
        let coords: Vec<String> = pts
            .iter()
            .map(|(t, y)| {
                let px = pad + (t - t0) / ts * (w - 2.0 * pad);
                let py = h - pad - (y - ymin) / ys * (h - 2.0 * pad);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{pad}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">t in [{t0:.3e}, {t1:.3e}], y in [{ymin:.3}, {ymax:.3}]</text>",
            h - 15.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the requested files into `dir`: `series.csv` and `snapshots/NNNN.csv`
/// (csv), `report.json` (json) and `plot.svg` (svg).
pub fn write_outputs(traj: Option<&Trajectory>, report: &DiagnosticsReport, output: &OutputConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    if output.wants(Format::Json) {
        let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
        write_file(&dir.join("report.json"), &text)?;
    }
    let Some(traj) = traj else {
        return Ok(());
    };
    if output.wants(Format::Csv) {
        write_file(&dir.join("series.csv"), &series_csv(traj))?;
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps).map_err(io_err(&snaps))?;
        for k in 0..traj.states.len() {
            write_file(&snaps.join(format!("{k:04}.csv")), &snapshot_csv(traj, k))?;
        }
    }
    if output.wants(Format::Svg) {
        write_file(&dir.join("plot.svg"), &plot_svg(traj))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ErdsSystem;
    use crate::solver::{simulate, Grid1D, StateField, TimeConfig};

    fn run(t_end: f64) -> Trajectory {
        let s = StateField::from_fn(Grid1D::unit(8), 2, |x| vec![1.0 + 0.1 * x, 1.0]);
        simulate(&ErdsSystem::witness(1), &s, &TimeConfig::fixed(t_end, 1e-3, 1)).unwrap()
    }

    #[test]
    fn zero_horizon_gives_two_lines() {
        let csv = series_csv(&run(0.0));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        let snap = snapshot_csv(&run(0.01), 0);
        assert!(snap.starts_with("x,u,c_1\n6.2500000000000000e-2,"));
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = plot_svg(&run(0.01));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
    }
}
