use nlsint::grid::GridSpec;
use nlsint::report::ResidualReport;
use num_complex::Complex64;
use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: String,
    pub reports: Vec<ResidualReport>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub wall_time: f64,
    pub exit_status: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn write_report(dir: &Path, report: &RunReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(dir.join("report.json"), text)
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> std::io::Result<String> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(name.to_string())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    quantity: &'a str,
    columns: [&'a str; 5],
    grid: GridSpec,
    rows: usize,
}

/// `<name>.csv` with columns `x,t,re,im,abs` (time-major) and `<name>.json`
/// describing it. Returns both paths.
pub fn write_field(dir: &Path, name: &str, grid: &GridSpec, data: &[Complex64]) -> std::io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let csv = format!("{name}.csv");
    let mut w = BufWriter::new(fs::File::create(dir.join(&csv))?);
    writeln!(w, "x,t,re,im,abs")?;
    for j in 0..grid.n_t {
        for i in 0..grid.n_x {
            let z = data[grid.index(i, j)];
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", grid.x(i), grid.t(j), z.re, z.im, z.norm())?;
        }
    }
    w.flush()?;
    let side = Sidecar { quantity: name, columns: ["x", "t", "re", "im", "abs"], grid: *grid, rows: data.len() };
    let json = write_json(dir, &format!("{name}.json"), &side)?;
    Ok(vec![csv, json])
}

pub fn write_real_field(dir: &Path, name: &str, grid: &GridSpec, data: &[f64]) -> std::io::Result<Vec<String>> {
    let z: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    write_field(dir, name, grid, &z)
}
