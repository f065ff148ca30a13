//! The event log (`events.csv`): one row per impulse or flyby.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategies::ShipKind;
use crate::units::Vec3;

pub const EVENTS_HEADER: [&str; 10] = [
    "event_id",
    "vehicle_id",
    "vehicle_kind",
    "parent_star",
    "target_star",
    "t_myr",
    "dvx",
    "dvy",
    "dvz",
    "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventNote {
    /// First impulse of a vehicle.
    Depart,
    /// Later mothership impulse.
    Burn,
    /// Settler mid-course impulse.
    Midcourse,
    /// Mothership passes the target star; no impulse.
    Flyby,
    /// Final impulse matching the target star's velocity.
    Rendezvous,
}

impl EventNote {
    pub const ALL: [EventNote; 5] = [
        EventNote::Depart,
        EventNote::Burn,
        EventNote::Midcourse,
        EventNote::Flyby,
        EventNote::Rendezvous,
    ];

    pub fn is_impulse(self) -> bool {
        self != EventNote::Flyby
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: u64,
    pub vehicle_id: u32,
    pub vehicle_kind: ShipKind,
    /// Star the vehicle departed from (Sol for motherships, pods and fast
    /// ships).
    pub parent_star: u32,
    pub target_star: u32,
    pub t_myr: f64,
    pub dvx: f64,
    pub dvy: f64,
    pub dvz: f64,
    pub note: EventNote,
}

impl EventRecord {
    pub fn dv(&self) -> Vec3 {
        Vec3::new(self.dvx, self.dvy, self.dvz)
    }

    pub fn set_dv(&mut self, dv: &Vec3) {
        self.dvx = dv.x;
        self.dvy = dv.y;
        self.dvz = dv.z;
    }
}

pub fn events_to_string(events: &[EventRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if events.is_empty() {
        w.write_record(EVENTS_HEADER)?;
    }
    for e in events {
        w.serialize(e)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Cache(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_events(path: &Path, events: &[EventRecord]) -> Result<()> {
    std::fs::write(path, events_to_string(events)?).map_err(|e| Error::io(path, e))
}

pub fn events_from_str(text: &str) -> Result<Vec<EventRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != EVENTS_HEADER {
        return Err(Error::EventLog {
            record: 1,
            reason: format!("expected header {}", EVENTS_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<EventRecord>().enumerate() {
        let e = row.map_err(|e| Error::EventLog {
            record: i + 2,
            reason: e.to_string(),
        })?;
        if ![e.t_myr, e.dvx, e.dvy, e.dvz].iter().all(|x| x.is_finite()) {
            return Err(Error::EventLog {
                record: i + 2,
                reason: "non-finite value".into(),
            });
        }
        out.push(e);
    }
    Ok(out)
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    events_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<EventRecord> {
        vec![
            EventRecord {
                event_id: 0,
                vehicle_id: 0,
                vehicle_kind: ShipKind::FastShip,
                parent_star: 0,
                target_star: 12,
                t_myr: 0.0,
                dvx: 0.1 + 0.2,
                dvy: -512.125,
                dvz: 1e-17,
                note: EventNote::Depart,
            },
            EventRecord {
                event_id: 1,
                vehicle_id: 0,
                vehicle_kind: ShipKind::FastShip,
                parent_star: 0,
                target_star: 12,
                t_myr: 37.5,
                dvx: 3.0,
                dvy: 2.0,
                dvz: 1.0,
                note: EventNote::Rendezvous,
            },
        ]
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let ev = sample();
        let text = events_to_string(&ev).unwrap();
        assert!(text.starts_with("event_id,vehicle_id,vehicle_kind,parent_star,target_star,t_myr,dvx,dvy,dvz,note\n"));
        assert!(text.contains("fast_ship"));
        assert_eq!(events_from_str(&text).unwrap(), ev);
    }

    #[test]
    fn empty_log_has_header() {
        let text = events_to_string(&[]).unwrap();
        assert_eq!(text.trim(), EVENTS_HEADER.join(","));
        assert!(events_from_str(&text).unwrap().is_empty());
    }

    #[test]
    fn malformed_rows_are_reported() {
        let mut text = events_to_string(&sample()).unwrap();
        text.push_str("2,0,warp_drive,0,1,3.0,0,0,0,depart\n");
        match events_from_str(&text) {
            Err(Error::EventLog { record, .. }) => assert_eq!(record, 4),
            other => panic!("{other:?}"),
        }
        assert!(events_from_str("a,b\n1,2\n").is_err());
    }
}
