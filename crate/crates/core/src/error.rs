use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::scenario::Band;
use crate::schedule::Violation;

/// Input outside the domain of a physical formula.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainError {
    NonPositiveAltitude(f64),
    NonPositiveFrequency(f64),
    NonPositiveDistance(f64),
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::NonPositiveAltitude(h) => write!(f, "altitude must be > 0 km, got {h}"),
            DomainError::NonPositiveFrequency(v) => write!(f, "frequency must be > 0 Hz, got {v}"),
            DomainError::NonPositiveDistance(d) => write!(f, "distance must be > 0 km, got {d}"),
        }
    }
}

impl core::error::Error for DomainError {}

#[derive(Debug, Clone, PartialEq)]
pub enum LinkError {
    /// No link parameters (or no required C/N0) configured for the band.
    MissingRequiredCn0(Band),
    /// The front-end has no downlink-capable frequency range.
    NoLinkFrequency(String),
    Domain(DomainError),
}

impl fmt::Display for LinkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkError::MissingRequiredCn0(b) => {
                write!(f, "no required C/N0 configured for band {}", b.label())
            }
            LinkError::NoLinkFrequency(id) => {
                write!(f, "front-end {id} has no downlink-capable frequency range")
            }
            LinkError::Domain(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for LinkError {}

impl From<DomainError> for LinkError {
    fn from(e: DomainError) -> Self {
        LinkError::Domain(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PayloadError {
    IllegalTransition { device: String, from: &'static str, to: &'static str },
    UnknownDevice(String),
    NotASlot { sdr: String, frontend: String },
    SdrNotActive(String),
    SlotBusy { sdr: String, active: String },
}

impl PayloadError {
    pub fn code(&self) -> &'static str {
        match self {
            PayloadError::IllegalTransition { .. } => "illegal-transition",
            PayloadError::UnknownDevice(_) => "unknown-device",
            PayloadError::NotASlot { .. } => "not-a-slot",
            PayloadError::SdrNotActive(_) => "sdr-not-active",
            PayloadError::SlotBusy { .. } => "slot-busy",
        }
    }
}

impl fmt::Display for PayloadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadError::IllegalTransition { device, from, to } => {
                write!(f, "illegal-transition: {device} cannot go {from} -> {to}")
            }
            PayloadError::UnknownDevice(d) => write!(f, "unknown-device: {d}"),
            PayloadError::NotASlot { sdr, frontend } => {
                write!(f, "not-a-slot: {frontend} is not mounted on {sdr}")
            }
            PayloadError::SdrNotActive(s) => write!(f, "sdr-not-active: {s}"),
            PayloadError::SlotBusy { sdr, active } => {
                write!(f, "slot-busy: {sdr} already has {active} active")
            }
        }
    }
}

impl core::error::Error for PayloadError {}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// The schedule failed validation and the run was not forced.
    InvalidSchedule(Vec<Violation>),
    UnknownStation(String),
    Link(LinkError),
    Payload(PayloadError),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidSchedule(v) => {
                write!(f, "schedule has {} violation(s)", v.len())?;
                if let Some(first) = v.first() {
                    write!(f, "; first: {} at t={} s ({})", first.code.as_str(), first.t, first.detail)?;
                }
                Ok(())
            }
            SimError::UnknownStation(s) => write!(f, "unknown station {s}"),
            SimError::Link(e) => e.fmt(f),
            SimError::Payload(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for SimError {}

impl From<LinkError> for SimError {
    fn from(e: LinkError) -> Self {
        SimError::Link(e)
    }
}

impl From<PayloadError> for SimError {
    fn from(e: PayloadError) -> Self {
        SimError::Payload(e)
    }
}
