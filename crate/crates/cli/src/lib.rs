//! Command-line front end: `design`, `verify`, and `sweep` subcommands.
//!
//! Exit codes: 0 on success/pass, 1 on usage, configuration, design or
//! parse errors, 2 when a built or supplied circuit fails verification.
//! All magnitude-valued flags accept SPICE suffixes (`10k`, `4.7u`,
//! `1Meg`, ...). Outputs contain no timestamps: identical flags plus an
//! identical parameter file produce byte-identical netlist, report and CSV
//! files.

mod report;

use ampsyn_core::design::{
    design_diff_amp, design_opamp, design_power_amp, design_single_stage, design_two_stage,
    ComponentSet, DiffAmpSpec, GainTarget, OpAmpSpec, PowerAmpSpec, SeriesConfig, SingleStageSpec,
    TwoStageSpec,
};
use ampsyn_core::devices::{BjtParams, OpAmpModel};
use ampsyn_core::netlist::{build_circuit, emit, parse, Stimulus};
use ampsyn_core::values::{parse_magnitude, Series};
use ampsyn_core::verify::{
    check_design, small_signal_of, solve_dc, write_sweep_csv, VerificationReport, MIDBAND_HZ,
};
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_VERIFY_FAILED: u8 = 2;

/// Default peak output swing assumed for BJT designs when neither a swing
/// nor a supply is given; matches a small-signal audio stage driven to a
/// few hundred millivolts.
const DEFAULT_V0_PEAK: f64 = 0.2;

#[derive(Parser)]
#[command(
    name = "ampsyn",
    version,
    about = "Amplifier synthesis toolchain: size components, emit SPICE netlists, verify them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design an amplifier and write its netlist and report
    Design(DesignArgs),
    /// Parse a netlist and check its midband gain and DC bias
    Verify(VerifyArgs),
    /// Sweep a netlist's frequency response and export CSV
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    SingleStage,
    TwoStage,
    Opamp,
    Diff,
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesArg {
    E6,
    E12,
    E24,
}

impl From<SeriesArg> for Series {
    fn from(s: SeriesArg) -> Series {
        match s {
            SeriesArg::E6 => Series::E6,
            SeriesArg::E12 => Series::E12,
            SeriesArg::E24 => Series::E24,
        }
    }
}

fn magnitude(text: &str) -> Result<f64, String> {
    parse_magnitude(text).map_err(|e| e.to_string())
}

#[derive(Args)]
struct DesignArgs {
    /// Amplifier topology
    #[arg(value_enum)]
    topology: TopologyArg,

    /// Exact gain target; sign selects the op-amp configuration, and for
    /// the difference amplifier this is the differential gain
    #[arg(long, value_parser = magnitude, allow_negative_numbers = true)]
    gain: Option<f64>,
    /// Gain floor (the sized circuit meets or exceeds it)
    #[arg(long, value_parser = magnitude, conflicts_with = "gain")]
    gain_min: Option<f64>,
    /// Gain ceiling
    #[arg(long, value_parser = magnitude, conflicts_with_all = ["gain", "gain_min"])]
    gain_max: Option<f64>,

    /// Peak output swing, volts [default: 200m when --vcc is also absent]
    #[arg(long, value_parser = magnitude)]
    v0_peak: Option<f64>,
    /// Supply voltage; derived and snapped to a standard rail when absent
    #[arg(long, value_parser = magnitude)]
    vcc: Option<f64>,
    /// Load resistance
    #[arg(long, value_parser = magnitude)]
    rl: Option<f64>,
    /// Source resistance [default: 0]
    #[arg(long, value_parser = magnitude)]
    rs: Option<f64>,
    /// Lower cutoff frequency [default: 20 for BJT stages, 50 for power]
    #[arg(long, value_parser = magnitude)]
    fl: Option<f64>,
    /// Bias stability factor [default: 8 for BJT stages, 10 for power]
    #[arg(long, value_parser = magnitude)]
    stability: Option<f64>,
    /// Load power in watts (power topology only)
    #[arg(long, value_parser = magnitude)]
    power: Option<f64>,
    /// Largest resistance to use in op-amp networks [default: 10k]
    #[arg(long, value_parser = magnitude)]
    rbase: Option<f64>,

    /// Device parameter file (key = value); defaults to the built-in 2N2222 set
    #[arg(long)]
    params: Option<PathBuf>,
    /// Resistor value series (capacitors always snap on E6)
    #[arg(long, value_enum, default_value = "e24")]
    series: SeriesArg,
    /// Gain tolerance override for the verification verdict, as a fraction
    #[arg(long, value_parser = magnitude)]
    tolerance: Option<f64>,

    /// Netlist output path [default: <topology>.net]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report output path [default: netlist path with .report.txt]
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Netlist file to verify
    netlist: PathBuf,
    /// Gain magnitude the circuit must realize at 1 kHz
    #[arg(long, value_parser = magnitude, allow_negative_numbers = true)]
    gain: f64,
    /// Allowed relative gain deviation [default: 0.15]
    #[arg(long, value_parser = magnitude)]
    tolerance: Option<f64>,
    /// Device parameter file
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Netlist file to sweep
    netlist: PathBuf,
    /// Sweep start frequency
    #[arg(long, value_parser = magnitude, default_value = "1")]
    from: f64,
    /// Sweep stop frequency
    #[arg(long, value_parser = magnitude, default_value = "1Meg")]
    to: f64,
    /// Number of log-spaced points
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Device parameter file
    #[arg(long)]
    params: Option<PathBuf>,
}

/// Parses the argument list and runs it; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Design(args) => run_design(&args),
        Command::Verify(args) => run_verify(&args),
        Command::Sweep(args) => run_sweep(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn load_params(path: &Option<PathBuf>) -> anyhow::Result<BjtParams> {
    match path {
        Some(p) => BjtParams::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(BjtParams::default_2n2222().clone()),
    }
}

fn gain_target(args: &DesignArgs) -> anyhow::Result<GainTarget> {
    match (args.gain, args.gain_min, args.gain_max) {
        (Some(g), None, None) => Ok(GainTarget::exact(g)),
        (None, Some(g), None) => Ok(GainTarget::at_least(g)),
        (None, None, Some(g)) => Ok(GainTarget::at_most(g)),
        _ => bail!("exactly one of --gain, --gain-min, --gain-max is required"),
    }
}

fn run_design(args: &DesignArgs) -> anyhow::Result<u8> {
    let params = load_params(&args.params)?;
    let opamp = OpAmpModel::default();
    let series = SeriesConfig { resistors: args.series.into(), capacitors: Series::E6 };

    let cs: ComponentSet = match args.topology {
        TopologyArg::SingleStage => {
            let mut spec = SingleStageSpec::new(gain_target(args)?);
            spec.v0_peak = args.v0_peak.or_else(|| args.vcc.is_none().then_some(DEFAULT_V0_PEAK));
            spec.v_cc = args.vcc;
            spec.r_l = args.rl;
            spec.r_s = args.rs.unwrap_or(0.0);
            if let Some(fl) = args.fl {
                spec.f_l = fl;
            }
            if let Some(s) = args.stability {
                spec.stability = s;
            }
            design_single_stage(&spec, &params, &series)?
        }
        TopologyArg::TwoStage => {
            let mut spec = TwoStageSpec::new(gain_target(args)?);
            spec.v0_peak = args.v0_peak.or_else(|| args.vcc.is_none().then_some(DEFAULT_V0_PEAK));
            spec.v_cc = args.vcc;
            spec.r_l = args.rl;
            spec.r_s = args.rs.unwrap_or(0.0);
            if let Some(fl) = args.fl {
                spec.f_l = fl;
            }
            if let Some(s) = args.stability {
                spec.stability = s;
            }
            design_two_stage(&spec, &params, &series)?
        }
        TopologyArg::Opamp => {
            let mut spec = OpAmpSpec::new(gain_target(args)?);
            if let Some(r) = args.rbase {
                spec.r_base = r;
            }
            design_opamp(&spec, &series)?
        }
        TopologyArg::Diff => {
            let a_d = args
                .gain
                .ok_or_else(|| anyhow!("the difference amplifier takes --gain (differential gain)"))?;
            let mut spec = DiffAmpSpec::new(a_d);
            if let Some(r) = args.rbase {
                spec.r_base = r;
            }
            design_diff_amp(&spec, &series)?
        }
        TopologyArg::Power => {
            if args.gain.is_some() || args.gain_min.is_some() || args.gain_max.is_some() {
                bail!("the power amplifier takes --power, --vcc and --rl, not a gain target");
            }
            let p_load = args.power.ok_or_else(|| anyhow!("--power is required"))?;
            let v_cc = args.vcc.ok_or_else(|| anyhow!("--vcc is required"))?;
            let r_l = args.rl.ok_or_else(|| anyhow!("--rl is required"))?;
            let mut spec = PowerAmpSpec::new(p_load, v_cc, r_l);
            if let Some(fl) = args.fl {
                spec.f_l = fl;
            }
            if let Some(s) = args.stability {
                spec.stability = s;
            }
            design_power_amp(&spec, &params, &series)?
        }
    };

    let verdict: VerificationReport = check_design(&cs, &params, &opamp, args.tolerance)?;

    let out_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.net", cs.topology.name())));
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| out_path.with_extension("report.txt"));
    if out_path == report_path {
        bail!("netlist and report paths must differ");
    }

    let circuit = build_circuit(&cs, &Stimulus::for_design(&cs), &params, &opamp)?;
    let netlist_text = emit(&circuit);
    fs::write(&out_path, &netlist_text).with_context(|| format!("writing {}", out_path.display()))?;

    let report_text = report::render_design(&cs, &params, &verdict, &out_path);
    fs::write(&report_path, &report_text)
        .with_context(|| format!("writing {}", report_path.display()))?;
    print!("{report_text}");

    Ok(if verdict.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn run_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let params = load_params(&args.params)?;
    let text = fs::read_to_string(&args.netlist)
        .with_context(|| format!("reading {}", args.netlist.display()))?;
    let circuit = parse(&text)?;
    let ssc = small_signal_of(&circuit, &params)?;
    let midband = ssc.solve_ac(MIDBAND_HZ)?;

    let tolerance = args.tolerance.unwrap_or(0.15);
    let target = args.gain.abs();
    let deviation = (midband.magnitude - target).abs() / target;
    let gain_ok = deviation <= tolerance;

    // DC bias check when the circuit carries the dialect's bias labels.
    let dc = match solve_dc(&circuit, &params) {
        Ok(op) => Some(Ok(op)),
        Err(ampsyn_core::Error::Model(_)) => None, // not a biased CE circuit
        Err(e) => Some(Err(e.to_string())),
    };
    let dc_ok = !matches!(dc, Some(Err(_)));

    let passed = gain_ok && dc_ok;
    print!(
        "{}",
        report::render_verify(&args.netlist, &circuit.title, &midband, target, tolerance, &dc, passed)
    );
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn run_sweep(args: &SweepArgs) -> anyhow::Result<u8> {
    let params = load_params(&args.params)?;
    let text = fs::read_to_string(&args.netlist)
        .with_context(|| format!("reading {}", args.netlist.display()))?;
    let circuit = parse(&text)?;
    let ssc = small_signal_of(&circuit, &params)?;
    let results = ssc.sweep(args.from, args.to, args.points)?;

    match &args.csv {
        Some(path) => {
            if path == &args.netlist {
                bail!("CSV output path must differ from the netlist path");
            }
            let mut buf = Vec::new();
            write_sweep_csv(&results, &mut buf)?;
            fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_sweep_csv(&results, &mut stdout)?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_flags_are_exclusive() {
        assert_eq!(run(["ampsyn", "design", "single-stage"]), EXIT_ERROR);
        assert_eq!(
            run(["ampsyn", "design", "single-stage", "--gain", "20", "--gain-min", "10"]),
            EXIT_ERROR
        );
    }

    #[test]
    fn magnitudes_accept_suffixes() {
        assert_eq!(magnitude("10k").unwrap(), 10_000.0);
        assert!(magnitude("x").is_err());
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run(["ampsyn", "--help"]), EXIT_OK);
    }
}
