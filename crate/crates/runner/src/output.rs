//! Output bundles: time series, CCDF, summary, manifest and plot script.
//!
//! Every file is written to a temporary sibling first and renamed into place,
//! so a reader never observes a partially written file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ddc_core::{ccdf, summarize, RunOutput, RunSummary, Scalar, ScenarioConfig};
use serde::Serialize;
use serde_json::Value;

use crate::{Result, RunnerError};

pub const TIMESERIES_HEADER: &str = "t,omega,P,Pe,Pm,Ps,pending_consuming,pending_saving";
pub const CCDF_HEADER: &str = "delta_omega,R";
pub const MAX_CCDF_POINTS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct BundleOptions {
    /// Keep every `stride`-th time series row.
    pub stride: usize,
    pub plot_script: bool,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self {
            stride: 100,
            plot_script: true,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub name: &'a str,
    pub seed: u64,
    pub version: &'static str,
    pub steps: u64,
    pub timeseries_stride: usize,
    pub ccdf_points: usize,
    pub config: &'a ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{file_name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(RunnerError::io(path, e));
    }
    Ok(())
}

pub fn timeseries_csv<S: Scalar>(output: &RunOutput<S>, stride: usize) -> String {
    let s = &output.series;
    let rated = output.config.fleet.rated_power;
    let mut out = String::with_capacity(64 * (s.len() / stride.max(1) + 1));
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for i in (0..s.len()).step_by(stride.max(1)) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.t[i],
            s.omega[i],
            f64::from(s.load[i]) * rated,
            s.electric_load[i],
            s.mech_power[i],
            s.reserve_power[i],
            s.pending_consuming[i],
            s.pending_saving[i]
        );
    }
    out
}

pub fn ccdf_csv<S: Scalar>(output: &RunOutput<S>, max_points: usize) -> Result<String> {
    let curve = ccdf(&output.deviations())?;
    let mut out = String::from(CCDF_HEADER);
    out.push('\n');
    for (x, r) in curve.decimated(max_points) {
        let _ = writeln!(out, "{x},{r}");
    }
    Ok(out)
}

pub fn plot_script(name: &str) -> String {
    format!(
        "set terminal pngcairo size 1200,500\n\
         set output '{name}.png'\n\
         set datafile separator ','\n\
         set multiplot layout 1,2 title '{name}'\n\
         set xlabel 't [s]'\n\
         set ylabel 'omega [Hz]'\n\
         plot 'timeseries.csv' using 1:2 every ::1 with lines notitle\n\
         set logscale y\n\
         set xlabel 'delta omega [Hz]'\n\
         set ylabel 'R'\n\
         plot 'ccdf.csv' using 1:2 every ::1 with lines notitle\n\
         unset multiplot\n"
    )
}

/// Writes one run's bundle into `dir` and returns its summary.
pub fn write_bundle<S: Scalar>(
    dir: &Path,
    name: &str,
    output: &RunOutput<S>,
    options: &BundleOptions,
    extra: Option<Value>,
) -> Result<Bundle> {
    let summary = summarize(output)?;
    write_atomic(&dir.join("timeseries.csv"), timeseries_csv(output, options.stride).as_bytes())?;
    let ccdf_text = ccdf_csv(output, MAX_CCDF_POINTS)?;
    let ccdf_points = ccdf_text.lines().count() - 1;
    write_atomic(&dir.join("ccdf.csv"), ccdf_text.as_bytes())?;
    write_atomic(&dir.join("summary.json"), pretty(&summary).as_bytes())?;
    write_atomic(&dir.join("config.json"), crate::config::to_json(&output.config).as_bytes())?;
    let manifest = Manifest {
        name,
        seed: output.config.seed,
        version: env!("CARGO_PKG_VERSION"),
        steps: output.steps,
        timeseries_stride: options.stride,
        ccdf_points,
        config: &output.config,
        extra,
    };
    write_atomic(&dir.join("manifest.json"), pretty(&manifest).as_bytes())?;
    if options.plot_script {
        write_atomic(&dir.join("plot.gp"), plot_script(name).as_bytes())?;
    }
    Ok(Bundle {
        dir: dir.to_path_buf(),
        summary,
    })
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// One row of a comparison or sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub label: String,
    pub summary: RunSummary,
}

pub const TABLE_HEADER: &str =
    "label,sigma2_omega,pending_per_device,pending_ddc,pending_ceddc,r_0_1,max_abs_deviation";

pub fn table_csv(rows: &[TableRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for row in rows {
        let s = &row.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.label,
            s.sigma2_omega,
            s.mean_pending_per_device,
            opt(s.mean_pending_ddc),
            opt(s.mean_pending_ceddc),
            s.r_0_1,
            s.max_abs_deviation
        );
    }
    out
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    write_atomic(path, table_csv(rows).as_bytes())
}
