//! `starlab` command line. Exit codes: 0 ok, 1 domain failure (link not
//! closed, requests skipped, schedule violations), 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use starlab_core::link::{self, Direction, LinkAssessment, RfChannel};
use starlab_core::orbit::{find_passes, PassWindow};
use starlab_core::schedule::{duty_cycle, plan_greedy, validate, Schedule};
use starlab_core::sim::{self, scenario_passes};
use starlab_core::{default_scenario, Band, Scenario, SimError};

use crate::plan_file::{emit_schedule, load_schedule_file};
use crate::report::{write_report, Format};
use crate::{load_scenario_file, Error};

const OK: i32 = 0;
const DOMAIN: i32 = 1;
const USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "starlab", version, about = "Mission planning and simulation for a CubeSat SDR/optical payload lab")]
struct Cli {
    /// Scenario document; the built-in baseline when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Where machine-readable output goes (a file, or a directory for `simulate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format for `simulate`: json or csv.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulate even when the schedule has violations.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads for `validate`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Predict ground-station passes.
    Passes {
        #[arg(long, default_value_t = 24.0)]
        hours: f64,
        #[arg(long)]
        station: Option<String>,
    },
    /// Evaluate one link budget at a given slant range.
    Linkbudget(LinkArgs),
    /// Plan the scenario's experiments and downlinks.
    Schedule,
    /// Run the simulation and write a report.
    Simulate {
        /// Schedule file; planned automatically when omitted.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Check scenario files, and optionally a schedule against each.
    Validate {
        files: Vec<PathBuf>,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BandArg {
    Uhf,
    S,
    X,
    Ka,
    Ttc,
    OpticalDown,
    OpticalUp,
}

#[derive(Debug, clap::Args)]
struct LinkArgs {
    #[arg(long, value_enum)]
    band: BandArg,
    #[arg(long)]
    range_km: f64,
    #[arg(long)]
    tx_power_dbw: Option<f64>,
    #[arg(long)]
    tx_gain_dbi: Option<f64>,
    #[arg(long)]
    rx_gain_dbi: Option<f64>,
    #[arg(long)]
    losses_db: Option<f64>,
    #[arg(long)]
    required_margin_db: Option<f64>,
    #[arg(long)]
    rx_gt_dbk: Option<f64>,
    #[arg(long)]
    required_cn0_dbhz: Option<f64>,
    /// Pointing error, 3-sigma degrees (optical).
    #[arg(long)]
    pointing_deg: Option<f64>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Human-readable output goes to `out`, errors to
/// standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    OK
                }
                _ => {
                    let _ = write!(std::io::stderr(), "{}", e.render());
                    USAGE
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Sim(SimError::InvalidSchedule(_)) => DOMAIN,
                _ => USAGE,
            }
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Error> {
    match &cli.command {
        Command::Passes { hours, station } => passes(cli, out, *hours, station.as_deref()),
        Command::Linkbudget(args) => linkbudget(cli, out, args),
        Command::Schedule => schedule(cli, out),
        Command::Simulate { schedule } => simulate(cli, out, schedule.as_deref()),
        Command::Validate { files, schedule } => validate_files(cli, out, files, schedule.as_deref()),
    }
}

fn scenario(cli: &Cli) -> Result<Scenario, Error> {
    let mut s = match &cli.scenario {
        Some(path) => load_scenario_file(path)?,
        None => default_scenario(),
    };
    if let Some(seed) = cli.seed {
        s.sim.seed = seed;
    }
    Ok(s)
}

fn write_out(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(path) => crate::write(path, text.as_bytes()),
        None => Ok(()),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Error::io("<stdout>", e))?
    };
}

#[derive(Serialize)]
struct PassRow<'a> {
    station: &'a str,
    start_s: f64,
    end_s: f64,
    duration_s: f64,
    max_elevation_deg: f64,
    min_slant_range_km: f64,
}

fn passes(cli: &Cli, out: &mut dyn Write, hours: f64, station: Option<&str>) -> Result<i32, Error> {
    if !(hours >= 0.0) {
        return Err(Error::Schema(format!("--hours must be >= 0, got {hours}")));
    }
    let s = scenario(cli)?;
    if let Some(name) = station {
        if s.station(name).is_none() {
            return Err(Error::Reference(format!("unknown station {name:?}")));
        }
    }
    let horizon = hours * 3600.0;
    let mut windows: Vec<PassWindow> = s
        .stations
        .iter()
        .filter(|g| station.is_none_or(|n| g.name == n))
        .flat_map(|g| find_passes(&s.orbit, g, 0.0, horizon, s.sim.time_step_s))
        .collect();
    windows.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then_with(|| a.station.cmp(&b.station)));

    let rows: Vec<PassRow> = windows
        .iter()
        .map(|p| PassRow {
            station: &p.station,
            start_s: p.t_start,
            end_s: p.t_end,
            duration_s: p.duration_s(),
            max_elevation_deg: p.max_elevation_deg,
            min_slant_range_km: p.min_slant_range_km(),
        })
        .collect();
    say!(out, "{:<16} {:>10} {:>10} {:>8} {:>8} {:>10}", "station", "start_s", "end_s", "dur_s", "max_el", "min_km");
    for r in &rows {
        say!(
            out,
            "{:<16} {:>10.1} {:>10.1} {:>8.1} {:>8.2} {:>10.1}",
            r.station,
            r.start_s,
            r.end_s,
            r.duration_s,
            r.max_elevation_deg,
            r.min_slant_range_km
        );
    }
    say!(out, "{} pass(es) in {hours} h", rows.len());
    write_out(cli, &json(&rows))?;
    Ok(OK)
}

#[derive(Serialize)]
struct LinkRow {
    band: String,
    range_km: f64,
    frequency_hz: Option<f64>,
    fspl_db: Option<f64>,
    margin_db: Option<f64>,
    required_margin_db: Option<f64>,
    closed: bool,
    limiting_factor: &'static str,
    rate_bps: f64,
}

fn linkbudget(cli: &Cli, out: &mut dyn Write, a: &LinkArgs) -> Result<i32, Error> {
    let s = scenario(cli)?;
    let optical = match a.band {
        BandArg::OpticalDown => Some(Direction::Down),
        BandArg::OpticalUp => Some(Direction::Up),
        _ => None,
    };
    let row = if let Some(dir) = optical {
        let pointing = a.pointing_deg.unwrap_or(s.link.pointing_error_3sigma_deg);
        let t = &s.optical;
        let res = link::optical_assess(t, a.range_km, pointing, dir);
        let range_ok = t.range_min_km <= a.range_km && a.range_km <= t.range_max_km;
        let pointing_ok = pointing <= t.pointing_requirement_3sigma_deg;
        say!(out, "band: optical {}", if dir == Direction::Down { "downlink" } else { "uplink" });
        say!(
            out,
            "range: {} km within [{}, {}] km: {}",
            a.range_km,
            t.range_min_km,
            t.range_max_km,
            yes_no(range_ok)
        );
        say!(
            out,
            "pointing: {} deg (3-sigma) <= {} deg: {}",
            pointing,
            t.pointing_requirement_3sigma_deg,
            yes_no(pointing_ok)
        );
        link_row(a, None, None, None, &res)
    } else {
        let band = match a.band {
            BandArg::Uhf => Band::Uhf,
            BandArg::S => Band::S,
            BandArg::X => Band::X,
            BandArg::Ka => Band::Ka,
            _ => Band::Ttc,
        };
        let ch: RfChannel = if band == Band::Ttc {
            s.platform.ttc_channel()
        } else {
            s.frontends
                .iter()
                .filter(|f| f.band == band)
                .find_map(|f| f.channel())
                .ok_or_else(|| Error::Reference(format!("no front-end with a downlink range in band {band}")))?
        };
        let mut p = s
            .link
            .bands
            .get(&band)
            .cloned()
            .ok_or_else(|| Error::Reference(format!("no link parameters for band {band}")))?;
        if let Some(v) = a.tx_power_dbw {
            p.tx_power_dbw = v;
        }
        if a.tx_gain_dbi.is_some() {
            p.tx_gain_dbi = a.tx_gain_dbi;
        }
        if let Some(v) = a.rx_gain_dbi {
            p.rx_gain_dbi = v;
        }
        if let Some(v) = a.losses_db {
            p.system_losses_db = v;
        }
        if let Some(v) = a.required_margin_db {
            p.required_margin_db = v;
        }
        if let Some(v) = a.rx_gt_dbk {
            p.rx_figure_of_merit_dbk = v;
        }
        if a.required_cn0_dbhz.is_some() {
            p.required_cn0_dbhz = a.required_cn0_dbhz;
        }
        let fspl = link::fspl_db(ch.frequency_hz, a.range_km).map_err(|e| Error::Schema(e.to_string()))?;
        let res = link::rf_assess_channel(&ch, &p, a.range_km).map_err(|e| Error::Reference(e.to_string()))?;
        say!(out, "band: {band} at {:.3} MHz", ch.frequency_hz / 1e6);
        say!(out, "range: {} km", a.range_km);
        say!(out, "FSPL: {fspl:.2} dB");
        say!(out, "margin: {:.2} dB (required {:.2} dB)", res.margin_db.unwrap_or(f64::NAN), p.required_margin_db);
        link_row(a, Some(ch.frequency_hz), Some(fspl), Some(p.required_margin_db), &res)
    };
    say!(out, "closed: {}", yes_no(row.closed));
    say!(out, "limiting factor: {}", row.limiting_factor);
    say!(out, "rate: {:.3} Mbit/s", row.rate_bps / 1e6);
    write_out(cli, &json(&row))?;
    Ok(if row.closed { OK } else { DOMAIN })
}

fn link_row(a: &LinkArgs, f: Option<f64>, fspl: Option<f64>, req: Option<f64>, res: &LinkAssessment) -> LinkRow {
    LinkRow {
        band: a.band.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default(),
        range_km: a.range_km,
        frequency_hz: f,
        fspl_db: fspl,
        margin_db: res.margin_db,
        required_margin_db: req,
        closed: res.closed,
        limiting_factor: res.limiting_factor.as_str(),
        rate_bps: res.achievable_rate_bps,
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn schedule(cli: &Cli, out: &mut dyn Write) -> Result<i32, Error> {
    let s = scenario(cli)?;
    let passes = scenario_passes(&s);
    let plan = plan_greedy(&s.experiments, &passes, &s);
    for skip in &plan.skipped {
        say!(out, "skipped {}: {}", skip.id, skip.reason.as_str());
        if let starlab_core::schedule::SkipReason::FlatsatFailed(findings) = &skip.reason {
            for f in findings {
                say!(out, "  flatsat {}: {}", f.code.as_str(), f.detail);
            }
        }
    }
    let violations = validate(&plan.schedule, &s, &passes);
    for v in &violations {
        say!(out, "violation {v}");
    }
    let duty = duty_cycle(&plan.schedule, s.orbital_period_s(), s.sim.duration_s);
    let downlinks = plan.schedule.entries.len() - plan.placed();
    say!(out, "placed {} of {} request(s), {} skipped, {downlinks} downlink(s)", plan.placed(), s.experiments.len(), plan.skipped.len());
    let per_orbit: Vec<String> = duty.per_orbit.iter().map(|d| format!("{d:.3}")).collect();
    say!(out, "duty cycle per orbit: [{}]", per_orbit.join(", "));
    say!(out, "min duty cycle: {:.3}", duty.min);
    write_out(cli, &emit_schedule(&plan.schedule))?;
    Ok(if plan.skipped.is_empty() && violations.is_empty() { OK } else { DOMAIN })
}

/// The schedule `simulate` runs when no file is given.
pub fn auto_schedule(s: &Scenario) -> Schedule {
    plan_greedy(&s.experiments, &scenario_passes(s), s).schedule
}

fn simulate(cli: &Cli, out: &mut dyn Write, schedule: Option<&Path>) -> Result<i32, Error> {
    let format: Format = cli.format.parse()?;
    let s = scenario(cli)?;
    let sched = match schedule {
        Some(path) => load_schedule_file(path)?,
        None => auto_schedule(&s),
    };
    let report = match sim::run(&s, &sched, cli.force) {
        Err(SimError::InvalidSchedule(violations)) => {
            for v in &violations {
                say!(out, "violation {v}");
            }
            say!(out, "schedule rejected with {} violation(s); use --force to run anyway", violations.len());
            return Ok(DOMAIN);
        }
        other => other?,
    };
    let t = &report.totals;
    say!(out, "scenario {}", report.scenario_digest);
    say!(out, "entries: {}, events: {}", sched.entries.len(), report.events.len());
    say!(
        out,
        "bits produced {} downlinked {} dropped {} remaining {}",
        t.produced_bits,
        t.downlinked_bits,
        t.dropped_bits,
        t.remaining_bits
    );
    let min_soc = report.energy_trace.iter().map(|e| e.soc_wh).fold(f64::INFINITY, f64::min);
    if min_soc.is_finite() {
        say!(out, "min state of charge: {min_soc:.3} Wh");
    }
    say!(out, "min duty cycle: {:.3}", report.duty_cycle.min);
    for v in &report.violations {
        say!(out, "violation {v}");
    }
    if let Some(dir) = &cli.out {
        for path in write_report(&report, format, dir)? {
            say!(out, "wrote {}", path.display());
        }
    }
    Ok(if report.violations.is_empty() { OK } else { DOMAIN })
}

fn validate_files(cli: &Cli, out: &mut dyn Write, files: &[PathBuf], schedule: Option<&Path>) -> Result<i32, Error> {
    let mut paths: Vec<PathBuf> = cli.scenario.iter().cloned().collect();
    paths.extend(files.iter().cloned());
    if paths.is_empty() {
        return Err(Error::Schema("validate needs at least one scenario file".into()));
    }
    let sched = schedule.map(load_schedule_file).transpose()?;

    let check = |path: &Path| -> (i32, Vec<String>) {
        let s = match load_scenario_file(path) {
            Ok(s) => s,
            Err(Error::Invalid(issues)) => return (DOMAIN, issues.iter().map(ToString::to_string).collect()),
            Err(e) => return (USAGE, vec![e.to_string()]),
        };
        let Some(sched) = &sched else { return (OK, Vec::new()) };
        let violations = validate(sched, &s, &scenario_passes(&s));
        let code = if violations.is_empty() { OK } else { DOMAIN };
        (code, violations.iter().map(|v| format!("violation {v}")).collect())
    };

    let results: Vec<(i32, Vec<String>)> = if cli.jobs <= 1 || paths.len() == 1 {
        paths.iter().map(|p| check(p)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let mut slots: Vec<Option<(i32, Vec<String>)>> = vec![None; paths.len()];
        std::thread::scope(|scope| {
            let workers: Vec<_> = (0..cli.jobs.min(paths.len()))
                .map(|_| {
                    scope.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(p) = paths.get(i) else { break };
                            done.push((i, check(p)));
                        }
                        done
                    })
                })
                .collect();
            for w in workers {
                for (i, r) in w.join().expect("validation worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|r| r.expect("every file is checked")).collect()
    };

    let mut code = OK;
    for (path, (c, lines)) in paths.iter().zip(&results) {
        say!(out, "{}: {}", path.display(), if *c == OK { "ok" } else { "FAILED" });
        for l in lines {
            say!(out, "  {l}");
        }
        code = code.max(*c);
    }
    Ok(code)
}
