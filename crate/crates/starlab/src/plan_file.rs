//! Schedule files: JSON entries with times written as relative durations
//! (`"PT5400S"`) and devices as `"<sdr>/<front-end>"` or `"optical"`.

use serde::{Deserialize, Serialize};
use starlab_core::schedule::{Assignment, EntryKind, Schedule, ScheduleEntry};
use starlab_core::Band;

use crate::error::Error;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    entries: Vec<EntryDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    id: String,
    kind: String,
    start: String,
    end: String,
    devices: Vec<String>,
    band: String,
    #[serde(default)]
    station: Option<String>,
    #[serde(default)]
    extra_power_w: f64,
    #[serde(default)]
    data_rate_bps: f64,
}

pub fn format_offset(t: f64) -> String {
    format!("PT{t}S")
}

pub fn parse_offset(text: &str) -> Option<f64> {
    let secs = text.strip_prefix("PT")?.strip_suffix('S')?;
    secs.parse::<f64>().ok().filter(|t| t.is_finite())
}

fn device_label(a: &Assignment) -> String {
    match a {
        Assignment::Sdr { sdr, frontend } => format!("{}/{}", sdr.as_str(), frontend.as_str()),
        Assignment::Optical => "optical".to_owned(),
    }
}

fn parse_device(label: &str) -> Option<Assignment> {
    if label == "optical" {
        return Some(Assignment::Optical);
    }
    let (sdr, fe) = label.split_once('/')?;
    (!sdr.is_empty() && !fe.is_empty()).then(|| Assignment::Sdr { sdr: sdr.into(), frontend: fe.into() })
}

pub fn emit_schedule(sched: &Schedule) -> String {
    let doc = ScheduleDoc {
        entries: sched
            .entries
            .iter()
            .map(|e| EntryDoc {
                id: e.id.clone(),
                kind: match e.kind {
                    EntryKind::Experiment => "experiment",
                    EntryKind::Downlink => "downlink",
                }
                .to_owned(),
                start: format_offset(e.t_start),
                end: format_offset(e.t_end),
                devices: e.devices.iter().map(device_label).collect(),
                band: e.band.label().to_owned(),
                station: e.station.clone(),
                extra_power_w: e.extra_power_w,
                data_rate_bps: e.data_rate_bps,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("schedule documents always serialize");
    text.push('\n');
    text
}

pub fn parse_schedule(text: &str) -> Result<Schedule, Error> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let doc: ScheduleDoc = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    let entries = doc
        .entries
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let at = |what: &str| Error::Schema(format!("entries[{i}] ({}): {what}", d.id));
            let kind = match d.kind.as_str() {
                "experiment" => EntryKind::Experiment,
                "downlink" => EntryKind::Downlink,
                other => return Err(at(&format!("unknown kind {other:?}"))),
            };
            let t_start = parse_offset(&d.start).ok_or_else(|| at(&format!("bad start {:?}", d.start)))?;
            let t_end = parse_offset(&d.end).ok_or_else(|| at(&format!("bad end {:?}", d.end)))?;
            let devices = d
                .devices
                .iter()
                .map(|l| parse_device(l).ok_or_else(|| at(&format!("bad device {l:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let band = Band::from_label(&d.band).ok_or_else(|| at(&format!("unknown band {:?}", d.band)))?;
            Ok(ScheduleEntry {
                id: d.id.clone(),
                kind,
                t_start,
                t_end,
                devices,
                band,
                station: d.station.clone(),
                extra_power_w: d.extra_power_w,
                data_rate_bps: d.data_rate_bps,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Schedule::new(entries))
}

pub fn load_schedule_file(path: &std::path::Path) -> Result<Schedule, Error> {
    parse_schedule(&crate::read(path)?)
}
