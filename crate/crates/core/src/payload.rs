//! Device modes for the two SDRs and the laser terminal, front-end slot
//! exclusivity, the onboard data store, and the pre-flight feasibility gate.
//!
//! Each SDR drives at most one of its two front-end slots at a time. The
//! two SDRs are independent and may run simultaneously.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::PayloadError;
use crate::scenario::{ExperimentSpec, FrontEndId, Scenario, SdrId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeviceMode {
    Off,
    Standby,
    Active,
}

impl DeviceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceMode::Off => "off",
            DeviceMode::Standby => "standby",
            DeviceMode::Active => "active",
        }
    }

    /// Off <-> Standby <-> Active; staying put is allowed.
    pub fn can_become(self, to: DeviceMode) -> bool {
        !matches!((self, to), (DeviceMode::Off, DeviceMode::Active) | (DeviceMode::Active, DeviceMode::Off))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Device {
    Sdr(SdrId),
    Optical,
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Device::Sdr(id) => f.write_str(id.as_str()),
            Device::Optical => f.write_str("optical"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrState {
    pub id: SdrId,
    pub slots: [FrontEndId; 2],
    pub standby_power_w: f64,
    pub active_power_w: f64,
    pub mode: DeviceMode,
    pub active_slot: Option<FrontEndId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalState {
    pub standby_power_w: f64,
    pub peak_power_w: f64,
    pub mode: DeviceMode,
}

/// Data that did not fit in the store. Newest data is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow {
    pub dropped_bits: u64,
}

/// FIFO payload data store, accounted in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DataStore {
    capacity_bits: u64,
    used_bits: u64,
    chunks: VecDeque<(String, u64)>,
}

impl DataStore {
    pub fn new(capacity_bits: u64) -> Self {
        DataStore { capacity_bits, used_bits: 0, chunks: VecDeque::new() }
    }

    pub fn capacity_bits(&self) -> u64 {
        self.capacity_bits
    }

    pub fn used_bits(&self) -> u64 {
        self.used_bits
    }

    /// Stored bits per source, oldest first.
    pub fn chunks(&self) -> impl Iterator<Item = (&str, u64)> {
        self.chunks.iter().map(|(s, b)| (s.as_str(), *b))
    }

    pub fn record(&mut self, source: &str, bits: u64) -> Option<Overflow> {
        let accepted = bits.min(self.capacity_bits - self.used_bits);
        if accepted > 0 {
            match self.chunks.back_mut() {
                Some((s, b)) if s == source => *b += accepted,
                _ => self.chunks.push_back((source.to_owned(), accepted)),
            }
            self.used_bits += accepted;
        }
        let dropped = bits - accepted;
        (dropped > 0).then_some(Overflow { dropped_bits: dropped })
    }

    /// Removes up to `bits`, oldest data first; returns what was removed.
    pub fn drain(&mut self, bits: u64) -> u64 {
        let mut left = bits.min(self.used_bits);
        let drained = left;
        while left > 0 {
            let Some(front) = self.chunks.front_mut() else { break };
            if front.1 <= left {
                left -= front.1;
                self.chunks.pop_front();
            } else {
                front.1 -= left;
                left = 0;
            }
        }
        self.used_bits -= drained;
        drained
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadState {
    pub sdrs: Vec<SdrState>,
    pub optical: OpticalState,
    pub store: DataStore,
    /// Running experiments and their extra power draw, W.
    pub active_experiments: BTreeMap<String, f64>,
}

impl PayloadState {
    /// Everything off, store empty.
    pub fn new(s: &Scenario) -> Self {
        PayloadState {
            sdrs: s
                .sdrs
                .iter()
                .map(|u| SdrState {
                    id: u.id.clone(),
                    slots: u.slots.clone(),
                    standby_power_w: u.standby_power_w,
                    active_power_w: u.active_power_w,
                    mode: DeviceMode::Off,
                    active_slot: None,
                })
                .collect(),
            optical: OpticalState {
                standby_power_w: s.optical.standby_power_w,
                peak_power_w: s.optical.peak_power_w,
                mode: DeviceMode::Off,
            },
            store: DataStore::new(s.platform.storage_capacity_bits()),
            active_experiments: BTreeMap::new(),
        }
    }

    fn sdr_mut(&mut self, id: &SdrId) -> Result<&mut SdrState, PayloadError> {
        self.sdrs
            .iter_mut()
            .find(|s| &s.id == id)
            .ok_or_else(|| PayloadError::UnknownDevice(id.0.clone()))
    }

    pub fn mode(&self, device: &Device) -> Option<DeviceMode> {
        match device {
            Device::Sdr(id) => self.sdrs.iter().find(|s| &s.id == id).map(|s| s.mode),
            Device::Optical => Some(self.optical.mode),
        }
    }

    pub fn set_mode(&mut self, device: &Device, mode: DeviceMode) -> Result<(), PayloadError> {
        let current = match device {
            Device::Sdr(id) => &mut self.sdr_mut(id)?.mode,
            Device::Optical => &mut self.optical.mode,
        };
        if !current.can_become(mode) {
            return Err(PayloadError::IllegalTransition {
                device: format!("{device}"),
                from: current.as_str(),
                to: mode.as_str(),
            });
        }
        *current = mode;
        if let Device::Sdr(id) = device {
            if mode != DeviceMode::Active {
                self.sdr_mut(id)?.active_slot = None;
            }
        }
        Ok(())
    }

    pub fn activate_frontend(&mut self, sdr: &SdrId, fe: &FrontEndId) -> Result<(), PayloadError> {
        let unit = self.sdr_mut(sdr)?;
        if !unit.slots.contains(fe) {
            return Err(PayloadError::NotASlot { sdr: sdr.0.clone(), frontend: fe.0.clone() });
        }
        if unit.mode != DeviceMode::Active {
            return Err(PayloadError::SdrNotActive(sdr.0.clone()));
        }
        match &unit.active_slot {
            Some(active) if active == fe => Ok(()),
            Some(active) => Err(PayloadError::SlotBusy { sdr: sdr.0.clone(), active: active.0.clone() }),
            None => {
                unit.active_slot = Some(fe.clone());
                Ok(())
            }
        }
    }

    pub fn active_frontends(&self) -> Vec<FrontEndId> {
        self.sdrs.iter().filter_map(|s| s.active_slot.clone()).collect()
    }

    pub fn record_data(&mut self, source: &str, bits: u64) -> Option<Overflow> {
        self.store.record(source, bits)
    }

    pub fn drain_data(&mut self, bits: u64) -> u64 {
        self.store.drain(bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FindingCode {
    UnknownFrontend,
    UnmountedFrontend,
    SlotConflict,
    ExceedsPeakSupply,
    ExceedsStorage,
    WindowTooShort,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::UnknownFrontend => "unknown-frontend",
            FindingCode::UnmountedFrontend => "unmounted-frontend",
            FindingCode::SlotConflict => "slot-conflict",
            FindingCode::ExceedsPeakSupply => "exceeds-peak-supply",
            FindingCode::ExceedsStorage => "exceeds-storage",
            FindingCode::WindowTooShort => "window-too-short",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub code: FindingCode,
    pub detail: String,
}

/// Worst-case instantaneous power of an experiment running alone: active
/// power of every SDR it touches, laser peak if used, plus its extra draw.
pub fn worst_case_load_w(exp: &ExperimentSpec, s: &Scenario) -> f64 {
    let hosts: BTreeSet<&SdrId> = exp.frontends.iter().filter_map(|fe| s.host_sdr(fe)).map(|u| &u.id).collect();
    let sdr_w: f64 = hosts.iter().filter_map(|id| s.sdr(id)).map(|u| u.active_power_w).sum();
    let optical_w = if exp.requires_optical { s.optical.peak_power_w } else { 0.0 };
    sdr_w + optical_w + exp.extra_power_w
}

/// Static feasibility check run before an experiment is admitted to
/// planning, mirroring a bench run on the laboratory replica.
pub fn flatsat_check(exp: &ExperimentSpec, s: &Scenario) -> Result<(), Vec<Finding>> {
    let mut findings = Vec::new();
    let mut per_sdr: BTreeMap<&SdrId, Vec<&FrontEndId>> = BTreeMap::new();
    for fe in &exp.frontends {
        if s.frontend(fe).is_none() {
            findings.push(Finding { code: FindingCode::UnknownFrontend, detail: format!("{fe} does not exist") });
            continue;
        }
        match s.host_sdr(fe) {
            Some(u) => per_sdr.entry(&u.id).or_default().push(fe),
            None => findings.push(Finding {
                code: FindingCode::UnmountedFrontend,
                detail: format!("{fe} is not mounted on any SDR"),
            }),
        }
    }
    for (sdr, fes) in &per_sdr {
        let distinct: BTreeSet<_> = fes.iter().collect();
        if distinct.len() > 1 {
            findings.push(Finding {
                code: FindingCode::SlotConflict,
                detail: format!("{} needs {} slots of {sdr} at once", exp.id, distinct.len()),
            });
        }
    }

    let load = worst_case_load_w(exp, s);
    if load > s.platform.supply_peak_w {
        findings.push(Finding {
            code: FindingCode::ExceedsPeakSupply,
            detail: format!("worst-case load {load} W > peak supply {} W", s.platform.supply_peak_w),
        });
    }

    let produced_bits = exp.data_rate_bps * exp.duration_s;
    let capacity_bits = s.platform.storage_capacity_bits() as f64;
    if produced_bits > capacity_bits {
        findings.push(Finding {
            code: FindingCode::ExceedsStorage,
            detail: format!("{produced_bits} bits produced > {capacity_bits} bits of storage"),
        });
    }

    if exp.earliest_start_s + exp.duration_s > exp.latest_end_s {
        findings.push(Finding {
            code: FindingCode::WindowTooShort,
            detail: format!(
                "{} s does not fit in [{}, {}]",
                exp.duration_s, exp.earliest_start_s, exp.latest_end_s
            ),
        });
    }

    if findings.is_empty() {
        Ok(())
    } else {
        Err(findings)
    }
}
