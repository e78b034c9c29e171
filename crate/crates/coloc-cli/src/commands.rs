//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use coloc::classical::{manders, median, otsu};
use coloc::permute::{auto_block_size, permutation_pvalue_with, PermOptions};
use coloc::power::{critical_value, power_sweep, CriticalValue, PowerPoint};
use coloc::rankcorr::PairedSample;
use coloc::rng::derive_seed;
use coloc::scan::{build_grid, tau_star, FloorPolicy, GridMode, ScanResult};
use coloc::simgen::{sample_alternative, sample_null, CopulaParams};
use coloc::stat::Statistic;
use coloc::Channel;

use crate::args::{
    AnalyzeArgs, BlockSizeArg, FloorChoice, FormatChoice, InputFormat, NullDistArgs, PowerArgs,
    PowerStat, SimFormat, SimMode, SimulateArgs, StatChoice,
};
use crate::error::{CliError, CliResult};
use crate::gridcsv;
use crate::pgm;
use crate::report::{
    sha256_hex, ConfigEcho, InputProvenance, Report, StatisticResult, SCHEMA_VERSION,
};

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn timestamp(disabled: bool) -> Option<String> {
    if disabled {
        None
    } else {
        Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
    }
}

/// Reads an image channel, returning the channel and its content digest.
pub fn load_channel(path: &Path, format: InputFormat) -> CliResult<(Channel, String)> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let digest = sha256_hex(&bytes);
    let format = match format {
        InputFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pgm") => InputFormat::Pgm,
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => {
                return Err(CliError::Usage(format!(
                    "cannot infer the format of {} from its extension; pass --input-format",
                    path.display()
                )))
            }
        },
        other => other,
    };
    let channel = match format {
        InputFormat::Pgm => pgm::parse(&bytes)
            .map_err(|m| CliError::Data(format!("{}: {m}", path.display())))?,
        InputFormat::Csv => {
            let text = std::str::from_utf8(&bytes).map_err(|_| {
                CliError::Data(format!("{}: file is not valid UTF-8", path.display()))
            })?;
            gridcsv::parse(text)
                .map_err(|m| CliError::Data(format!("{}: {m}", path.display())))?
        }
        InputFormat::Auto => unreachable!(),
    };
    Ok((channel, digest))
}

fn load_pair(
    x_path: &Path,
    y_path: &Path,
    format: InputFormat,
) -> CliResult<(Channel, Channel, Vec<InputProvenance>)> {
    let (x, x_digest) = load_channel(x_path, format)?;
    let (y, y_digest) = load_channel(y_path, format)?;
    if !x.same_dims(&y) {
        return Err(CliError::Data(format!(
            "channel dimension mismatch: {} is {}x{}, {} is {}x{}",
            x_path.display(),
            x.width(),
            x.height(),
            y_path.display(),
            y.width(),
            y.height()
        )));
    }
    let inputs = vec![
        InputProvenance {
            role: "x".into(),
            path: x_path.display().to_string(),
            sha256: x_digest,
            width: x.width(),
            height: x.height(),
        },
        InputProvenance {
            role: "y".into(),
            path: y_path.display().to_string(),
            sha256: y_digest,
            width: y.width(),
            height: y.height(),
        },
    ];
    Ok((x, y, inputs))
}

fn resolve_block_size(arg: BlockSizeArg, width: usize, height: usize) -> usize {
    match arg {
        BlockSizeArg::Auto => auto_block_size(width, height),
        BlockSizeArg::Fixed(d) => d,
    }
}

impl FloorChoice {
    pub fn policy(self) -> FloorPolicy {
        match self {
            FloorChoice::Default => FloorPolicy::Default,
            FloorChoice::OtsuMedian => FloorPolicy::OtsuMedian,
        }
    }

    fn label(self) -> &'static str {
        match self {
            FloorChoice::Default => "default",
            FloorChoice::OtsuMedian => "otsu-median",
        }
    }
}

impl StatChoice {
    fn label(self) -> &'static str {
        match self {
            StatChoice::Pearson => "pearson",
            StatChoice::Manders => "manders",
            StatChoice::TauStar => "tau-star",
            StatChoice::TauStarApp => "tau-star-app",
        }
    }

    fn statistics(self, floor: FloorPolicy) -> Vec<Statistic> {
        match self {
            StatChoice::Pearson => vec![Statistic::Pearson],
            StatChoice::Manders => vec![Statistic::MandersM1, Statistic::MandersM2],
            StatChoice::TauStar => vec![Statistic::TauStarFull(floor)],
            StatChoice::TauStarApp => vec![Statistic::TauStarApp(floor)],
        }
    }
}

impl PowerStat {
    fn statistic(self, floor: FloorPolicy) -> Statistic {
        match self {
            PowerStat::Pearson => Statistic::Pearson,
            PowerStat::MandersM1 => Statistic::MandersM1,
            PowerStat::MandersM2 => Statistic::MandersM2,
            PowerStat::TauStar => Statistic::TauStarFull(floor),
            PowerStat::TauStarApp => Statistic::TauStarApp(floor),
        }
    }
}

/// Per-statistic detail recomputed on the cropped analysis region, so the
/// report can carry thresholds and scan argmaxes alongside e0.
fn statistic_detail(
    stat: &Statistic,
    x: &Channel,
    y: &Channel,
) -> CliResult<(Option<coloc::classical::MandersPair>, Option<ScanResult>)> {
    let sample = PairedSample::from_channels(x, y)?;
    match stat {
        Statistic::Pearson => Ok((None, None)),
        Statistic::MandersM1 | Statistic::MandersM2 => {
            let alpha_x = otsu(x.pixels())?;
            let alpha_y = otsu(y.pixels())?;
            Ok((Some(manders(&sample, alpha_x, alpha_y)?), None))
        }
        Statistic::TauStarApp(policy) | Statistic::TauStarFull(policy) => {
            let mode = match stat {
                Statistic::TauStarApp(_) => GridMode::Approx,
                _ => GridMode::Full,
            };
            let grid = build_grid(sample.len(), mode)?;
            let grid = match policy {
                FloorPolicy::Default => grid,
                FloorPolicy::OtsuMedian => {
                    let fx = otsu(x.pixels())?.max(median(x.pixels())?);
                    let fy = otsu(y.pixels())?.max(median(y.pixels())?);
                    grid.with_floors(Some(fx), Some(fy))
                }
            };
            Ok((None, Some(tau_star(&sample, &grid)?)))
        }
    }
}

struct AnalysisRequest<'a> {
    x_path: &'a Path,
    y_path: &'a Path,
    statistics: &'a [Statistic],
    stat_label: &'a str,
    perms: usize,
    block_size: BlockSizeArg,
    seed: u64,
    floor: FloorChoice,
    input_format: InputFormat,
    shuffle_y: bool,
    smoothed: bool,
    no_timestamp: bool,
}

fn analysis_report(req: &AnalysisRequest<'_>) -> CliResult<Report> {
    let AnalysisRequest {
        x_path,
        y_path,
        statistics,
        stat_label,
        perms,
        block_size,
        seed,
        floor,
        input_format,
        shuffle_y,
        smoothed,
        no_timestamp,
    } = *req;
    let (x, y, inputs) = load_pair(x_path, y_path, input_format)?;
    let block_size = resolve_block_size(block_size, x.width(), x.height());
    let options = PermOptions { shuffle_y, smoothed };

    // The permutation engine crops internally; recompute the crop here so
    // report details describe the same analysis region.
    let cropped_w = (x.width() / block_size) * block_size;
    let cropped_h = (x.height() / block_size) * block_size;
    let xc = x.crop(cropped_w, cropped_h).map_err(CliError::from)?;
    let yc = y.crop(cropped_w, cropped_h).map_err(CliError::from)?;

    let mut results = Vec::with_capacity(statistics.len());
    for stat in statistics {
        let perm = permutation_pvalue_with(stat, &x, &y, perms, block_size, seed, options)?;
        let (manders_detail, scan_detail) = statistic_detail(stat, &xc, &yc)?;
        results.push(StatisticResult::from_perm_report(
            &perm,
            manders_detail,
            scan_detail,
        ));
    }

    Ok(Report {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: tool_version().to_string(),
        timestamp: timestamp(no_timestamp),
        config: ConfigEcho {
            stat: stat_label.to_string(),
            perms,
            block_size,
            seed,
            floor_policy: floor.label().to_string(),
            shuffle_target: if shuffle_y { "y" } else { "x" }.to_string(),
            p_value_rule: if smoothed { "smoothed" } else { "strict" }.to_string(),
        },
        inputs,
        results,
    })
}

pub fn run_analyze(args: &AnalyzeArgs) -> CliResult<String> {
    let statistics = args.stat.statistics(args.floor.policy());
    let report = analysis_report(&AnalysisRequest {
        x_path: &args.x,
        y_path: &args.y,
        statistics: &statistics,
        stat_label: args.stat.label(),
        perms: args.perms,
        block_size: args.block_size,
        seed: args.seed,
        floor: args.floor,
        input_format: args.input_format,
        shuffle_y: args.shuffle_y,
        smoothed: args.smoothed,
        no_timestamp: args.no_timestamp,
    })?;
    Ok(match args.format {
        FormatChoice::Json => report.to_json(),
        FormatChoice::Csv => report.to_csv(),
    })
}

pub fn run_null_dist(args: &NullDistArgs) -> CliResult<String> {
    let statistic = args.stat.statistic(args.floor.policy());
    let report = analysis_report(&AnalysisRequest {
        x_path: &args.x,
        y_path: &args.y,
        statistics: &[statistic],
        stat_label: statistic.name(),
        perms: args.perms,
        block_size: args.block_size,
        seed: args.seed,
        floor: args.floor,
        input_format: args.input_format,
        shuffle_y: args.shuffle_y,
        smoothed: args.smoothed,
        no_timestamp: args.no_timestamp,
    })?;
    Ok(match args.format {
        FormatChoice::Json => report.to_json(),
        FormatChoice::Csv => {
            // Replicate table; row 0 is the observed value.
            let result = &report.results[0];
            let mut out = String::from("replicate,value\n");
            out.push_str(&format!("0,{}\n", result.observed));
            if let Some(replicates) = &result.replicates {
                for (j, v) in replicates.iter().enumerate() {
                    out.push_str(&format!("{},{}\n", j + 1, v));
                }
            }
            out
        }
    })
}

#[derive(Serialize)]
struct SimulateSidecar<'a> {
    schema_version: &'a str,
    tool_version: &'a str,
    mode: &'a str,
    seed: u64,
    width: usize,
    height: usize,
    r_threshold: f64,
    theta: f64,
    psf_sigma: f64,
    channels: Vec<SidecarChannel>,
}

#[derive(Serialize)]
struct SidecarChannel {
    role: String,
    path: String,
    offset: f64,
    scale: f64,
    maxval: u16,
}

pub fn run_simulate(args: &SimulateArgs) -> CliResult<Option<String>> {
    let params = CopulaParams {
        width: args.width,
        height: args.height,
        r_threshold: args.r,
        theta: args.theta,
        psf_sigma: args.psf_sigma,
    };
    params.validate()?;
    let (x, y) = match args.mode {
        SimMode::Null => sample_null(&params, args.seed),
        SimMode::Alt => sample_alternative(&params, args.seed)?,
    };
    match args.format {
        SimFormat::Csv => {
            gridcsv::write_csv(&args.out_x, &x)?;
            gridcsv::write_csv(&args.out_y, &y)?;
            Ok(None)
        }
        SimFormat::Pgm => {
            // 16-bit quantization loses the exact intensities; the sidecar
            // records the affine scale of each channel.
            let sx = pgm::write_pgm(&args.out_x, &x)?;
            let sy = pgm::write_pgm(&args.out_y, &y)?;
            let sidecar = SimulateSidecar {
                schema_version: SCHEMA_VERSION,
                tool_version: tool_version(),
                mode: match args.mode {
                    SimMode::Null => "null",
                    SimMode::Alt => "alt",
                },
                seed: args.seed,
                width: args.width,
                height: args.height,
                r_threshold: args.r,
                theta: args.theta,
                psf_sigma: args.psf_sigma,
                channels: vec![
                    SidecarChannel {
                        role: "x".into(),
                        path: args.out_x.display().to_string(),
                        offset: sx.offset,
                        scale: sx.scale,
                        maxval: sx.maxval,
                    },
                    SidecarChannel {
                        role: "y".into(),
                        path: args.out_y.display().to_string(),
                        offset: sy.offset,
                        scale: sy.scale,
                        maxval: sy.maxval,
                    },
                ],
            };
            let sidecar_path = sidecar_path(&args.out_x);
            fs::write(
                &sidecar_path,
                serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
            )
            .map_err(|e| {
                CliError::Data(format!("cannot write {}: {e}", sidecar_path.display()))
            })?;
            Ok(None)
        }
    }
}

pub fn sidecar_path(out_x: &Path) -> PathBuf {
    let mut name = out_x.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct PowerOutput {
    schema_version: String,
    tool_version: String,
    alpha: f64,
    runs: usize,
    null_runs: usize,
    width: usize,
    height: usize,
    psf_sigma: f64,
    seed: u64,
    critical_values: Vec<CriticalValue>,
    points: Vec<PowerPoint>,
}

pub fn run_power(args: &PowerArgs) -> CliResult<String> {
    if args.r_list.is_empty() || args.theta_list.is_empty() {
        return Err(CliError::Usage(
            "--r-list and --theta-list must be nonempty".into(),
        ));
    }
    let base = CopulaParams {
        width: args.width,
        height: args.height,
        r_threshold: args.r_list[0],
        theta: args.theta_list[0],
        psf_sigma: args.psf_sigma,
    };
    base.validate()?;

    let mut critical_values = Vec::new();
    let mut points = Vec::new();
    for (i, stat_choice) in args.stats.iter().enumerate() {
        let stat = stat_choice.statistic(args.floor.policy());
        let crit = critical_value(
            &stat,
            &base,
            args.alpha,
            args.null_runs,
            derive_seed(args.seed, 2 * i as u64),
        )?;
        let stat_points = power_sweep(
            &stat,
            &base,
            &args.r_list,
            &args.theta_list,
            args.runs,
            &crit,
            derive_seed(args.seed, 2 * i as u64 + 1),
        )?;
        critical_values.push(crit);
        points.extend(stat_points);
    }

    Ok(match args.format {
        FormatChoice::Csv => {
            let mut out = String::from("statistic,R,theta,runs,rejections,beta\n");
            for p in &points {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.statistic_name, p.r_threshold, p.theta, p.runs, p.rejections, p.beta
                ));
            }
            out
        }
        FormatChoice::Json => serde_json::to_string_pretty(&PowerOutput {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: tool_version().to_string(),
            alpha: args.alpha,
            runs: args.runs,
            null_runs: args.null_runs,
            width: args.width,
            height: args.height,
            psf_sigma: args.psf_sigma,
            seed: args.seed,
            critical_values,
            points,
        })
        .expect("power output serializes"),
    })
}
