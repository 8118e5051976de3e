//! Single-ended waveform records: validation, resampling, windowing and the
//! native on-disk record format. COMTRADE lives in [`comtrade`].

pub mod comtrade;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per fundamental cycle the location method works at.
pub const SAMPLES_PER_CYCLE: usize = 80;
/// Half-cycle window on each side of the fault sample.
pub const HALF_WINDOW: usize = SAMPLES_PER_CYCLE / 2;
/// Rows of a fault window: 40 pre-fault, the fault sample, 40 post-fault.
pub const WINDOW_ROWS: usize = 2 * HALF_WINDOW + 1;
/// Columns of a fault window, ordered `[iA, iB, iC, uA, uB, uC]`.
pub const WINDOW_COLS: usize = 6;
/// Flattened window length fed to the regressor.
pub const WINDOW_LEN: usize = WINDOW_ROWS * WINDOW_COLS;

const RECORD_MAGIC: &[u8; 4] = b"FLRC";
const RECORD_VERSION: u16 = 1;

/// Three-phase voltages and currents measured at one line terminal.
///
/// Voltages are in volts, currents in amperes; the current reference
/// direction is from the bus into the protected line.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    pub station_id: String,
    pub base_frequency: f64,
    pub sample_rate: f64,
    /// Phase voltages A, B, C.
    pub v: [Vec<f64>; 3],
    /// Phase currents A, B, C.
    pub i: [Vec<f64>; 3],
    pub trigger_index: Option<usize>,
}

impl WaveformRecord {
    pub fn len(&self) -> usize {
        self.v[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample interval in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn samples_per_cycle(&self) -> f64 {
        self.sample_rate / self.base_frequency
    }

    /// Channels in the fixed order `va, vb, vc, ia, ib, ic`.
    pub fn channels(&self) -> [&[f64]; 6] {
        [
            &self.v[0], &self.v[1], &self.v[2], &self.i[0], &self.i[1], &self.i[2],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::InvalidRecord(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.base_frequency != 50.0 && self.base_frequency != 60.0 {
            return Err(Error::InvalidRecord(format!(
                "base frequency must be 50 or 60 Hz, got {}",
                self.base_frequency
            )));
        }
        let n = self.len();
        if self.channels().iter().any(|c| c.len() != n) {
            return Err(Error::InvalidRecord("channel lengths differ".into()));
        }
        let needed = (2.0 * self.samples_per_cycle()).ceil() as usize;
        if n < needed {
            return Err(Error::InvalidRecord(format!(
                "record holds {n} samples, at least two cycles ({needed}) required"
            )));
        }
        if self
            .channels()
            .iter()
            .any(|c| c.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidRecord("non-finite sample".into()));
        }
        Ok(())
    }

    /// Writes the native record format: magic, version, a JSON header and a
    /// column-major little-endian f64 channel block.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = RecordHeader {
            station_id: self.station_id.clone(),
            base_frequency: self.base_frequency,
            sample_rate: self.sample_rate,
            samples: self.len(),
            trigger_index: self.trigger_index,
            channels: CHANNEL_NAMES.iter().map(|s| s.to_string()).collect(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(RECORD_MAGIC)?;
        w.write_all(&RECORD_VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.len() * 6 * 8);
        for ch in self.channels() {
            for x in ch {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != RECORD_MAGIC {
            return Err(Error::Format("not a faultloc record (bad magic)".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != RECORD_VERSION {
            return Err(Error::Format(format!(
                "unsupported record version {version}"
            )));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let mut json = vec![0u8; u32::from_le_bytes(b4) as usize];
        r.read_exact(&mut json)?;
        let header: RecordHeader = serde_json::from_slice(&json)?;
        if header.channels.len() != 6 {
            return Err(Error::Format(format!(
                "expected 6 channels, header lists {}",
                header.channels.len()
            )));
        }
        let n = header.samples;
        let mut block = vec![0u8; n * 6 * 8];
        r.read_exact(&mut block)?;
        let mut chans: Vec<Vec<f64>> = block
            .chunks_exact(n * 8)
            .map(|c| {
                c.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect()
            })
            .collect();
        if n == 0 {
            chans = vec![Vec::new(); 6];
        }
        let mut it = chans.into_iter();
        let mut next = || it.next().unwrap_or_default();
        let rec = WaveformRecord {
            station_id: header.station_id,
            base_frequency: header.base_frequency,
            sample_rate: header.sample_rate,
            v: [next(), next(), next()],
            i: [next(), next(), next()],
            trigger_index: header.trigger_index,
        };
        Ok(rec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// Loads either a native record or, for a `.cfg` path, the COMTRADE pair
    /// with the `.dat` file next to it.
    pub fn load_any(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let is_cfg = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("cfg"));
        if !is_cfg {
            return Self::load(path);
        }
        let cfg = std::fs::read(path)?;
        let dat_path = ["dat", "DAT"]
            .iter()
            .map(|e| path.with_extension(e))
            .find(|p| p.exists())
            .ok_or_else(|| Error::Structure(format!("no .dat file next to {}", path.display())))?;
        let dat = std::fs::read(dat_path)?;
        comtrade::parse_comtrade(&cfg, &dat)
    }
}

const CHANNEL_NAMES: [&str; 6] = ["va", "vb", "vc", "ia", "ib", "ic"];

#[derive(Serialize, Deserialize)]
struct RecordHeader {
    station_id: String,
    base_frequency: f64,
    sample_rate: f64,
    samples: usize,
    trigger_index: Option<usize>,
    channels: Vec<String>,
}

/// An 81x6 fault window, row-major, columns `[iA, iB, iC, uA, uB, uC]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    pub label_km: Option<f64>,
}

impl SampleMatrix {
    /// Row index of the fault-initiation sample.
    pub const FAULT_INDEX: usize = HALF_WINDOW;

    pub fn from_rows(data: Vec<f64>, label_km: Option<f64>) -> Result<Self> {
        if data.len() != WINDOW_LEN {
            return Err(Error::Dimension(format!(
                "sample matrix needs {WINDOW_LEN} values, got {}",
                data.len()
            )));
        }
        Ok(Self { data, label_km })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn fault_index(&self) -> usize {
        Self::FAULT_INDEX
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * WINDOW_COLS..(r + 1) * WINDOW_COLS]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * WINDOW_COLS + col]
    }

    /// Divides current columns by `current_base` and voltage columns by `voltage_base`.
    pub fn normalized(&self, voltage_base: f64, current_base: f64) -> SampleMatrix {
        let data = self
            .data
            .chunks_exact(WINDOW_COLS)
            .flat_map(|row| {
                [
                    row[0] / current_base,
                    row[1] / current_base,
                    row[2] / current_base,
                    row[3] / voltage_base,
                    row[4] / voltage_base,
                    row[5] / voltage_base,
                ]
            })
            .collect();
        SampleMatrix {
            data,
            label_km: self.label_km,
        }
    }
}

/// Linear-interpolation resampling to `samples_per_cycle` times the base frequency.
pub fn resample(record: &WaveformRecord, samples_per_cycle: usize) -> Result<WaveformRecord> {
    let target = samples_per_cycle as f64 * record.base_frequency;
    if record.sample_rate < 0.5 * target {
        return Err(Error::RateTooLow {
            rate: record.sample_rate,
            target,
            required: 0.5 * target,
        });
    }
    if record.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: record.len(),
        });
    }
    let ratio = record.sample_rate / target;
    if (ratio - 1.0).abs() < 1e-9 {
        let mut out = record.clone();
        out.sample_rate = target;
        return Ok(out);
    }
    let last = (record.len() - 1) as f64;
    let n_out = (last / ratio + 1e-9).floor() as usize + 1;
    let interp = |x: &[f64]| -> Vec<f64> {
        (0..n_out)
            .map(|k| {
                let pos = k as f64 * ratio;
                let lo = (pos.floor() as usize).min(x.len() - 1);
                let hi = (lo + 1).min(x.len() - 1);
                let frac = pos - lo as f64;
                x[lo] + (x[hi] - x[lo]) * frac
            })
            .collect()
    };
    Ok(WaveformRecord {
        station_id: record.station_id.clone(),
        base_frequency: record.base_frequency,
        sample_rate: target,
        v: [
            interp(&record.v[0]),
            interp(&record.v[1]),
            interp(&record.v[2]),
        ],
        i: [
            interp(&record.i[0]),
            interp(&record.i[1]),
            interp(&record.i[2]),
        ],
        trigger_index: record
            .trigger_index
            .map(|t| ((t as f64 / ratio).round() as usize).min(n_out - 1)),
    })
}

/// Cuts the 81x6 window centred on `t_f_index` from a record already at
/// 80 samples per cycle.
pub fn extract_window(record: &WaveformRecord, t_f_index: usize) -> Result<SampleMatrix> {
    let spc = record.samples_per_cycle();
    if (spc - SAMPLES_PER_CYCLE as f64).abs() > 1e-6 * SAMPLES_PER_CYCLE as f64 {
        return Err(Error::InvalidRecord(format!(
            "window extraction needs {SAMPLES_PER_CYCLE} samples per cycle, record has {spc}"
        )));
    }
    if t_f_index < HALF_WINDOW {
        return Err(Error::Window {
            side: "before",
            needed: HALF_WINDOW,
            available: t_f_index,
        });
    }
    let after = record.len().saturating_sub(t_f_index + 1);
    if after < HALF_WINDOW {
        return Err(Error::Window {
            side: "after",
            needed: HALF_WINDOW,
            available: after,
        });
    }
    let mut data = Vec::with_capacity(WINDOW_LEN);
    for k in t_f_index - HALF_WINDOW..=t_f_index + HALF_WINDOW {
        data.extend_from_slice(&[
            record.i[0][k],
            record.i[1][k],
            record.i[2][k],
            record.v[0][k],
            record.v[1][k],
            record.v[2][k],
        ]);
    }
    SampleMatrix::from_rows(data, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine_record(rate: f64, f0: f64, n: usize) -> WaveformRecord {
        let ch = |phase: f64, amp: f64| -> Vec<f64> {
            (0..n)
                .map(|k| amp * (2.0 * PI * f0 * k as f64 / rate + phase).cos())
                .collect()
        };
        let p = 2.0 * PI / 3.0;
        WaveformRecord {
            station_id: "test".into(),
            base_frequency: f0,
            sample_rate: rate,
            v: [ch(0.0, 1e5), ch(-p, 1e5), ch(p, 1e5)],
            i: [ch(-0.3, 1e3), ch(-0.3 - p, 1e3), ch(-0.3 + p, 1e3)],
            trigger_index: None,
        }
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn resample_identity_at_target_rate() {
        let r = sine_record(4000.0, 50.0, 400);
        let out = resample(&r, 80).unwrap();
        assert_eq!(out.v, r.v);
        assert_eq!(out.i, r.i);
        assert_eq!(out.sample_rate, 4000.0);
    }

    #[test]
    fn resample_preserves_rms() {
        // 5 kHz, 10 full cycles; RMS over whole cycles on both grids.
        let r = sine_record(5000.0, 50.0, 1001);
        let out = resample(&r, 80).unwrap();
        assert_eq!(out.len(), 801);
        let a = rms(&r.v[0][..1000]);
        let b = rms(&out.v[0][..800]);
        assert!(((a - b) / a).abs() < 1e-3, "{a} vs {b}");
    }

    #[test]
    fn resample_rejects_low_rate() {
        let r = sine_record(1000.0, 50.0, 100);
        assert!(matches!(resample(&r, 80), Err(Error::RateTooLow { .. })));
    }

    #[test]
    fn window_rows_and_bounds() {
        let r = sine_record(4000.0, 50.0, 400);
        let w = extract_window(&r, 200).unwrap();
        assert_eq!(w.data().len(), 81 * 6);
        assert_eq!(w.fault_index(), 40);
        assert_eq!(w.get(0, 3), r.v[0][160]);
        assert_eq!(w.get(80, 0), r.i[0][240]);
        assert_eq!(w.get(40, 5), r.v[2][200]);

        match extract_window(&r, 30) {
            Err(Error::Window {
                side: "before",
                needed: 40,
                available: 30,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(extract_window(&r, 360).is_err());
        assert!(extract_window(&r, 359).is_ok());
    }

    #[test]
    fn native_format_roundtrip() {
        let mut r = sine_record(4000.0, 50.0, 321);
        r.trigger_index = Some(160);
        let mut buf = Vec::new();
        r.write_to(&mut buf).unwrap();
        let back = WaveformRecord::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn validate_rejects_short_and_ragged() {
        let mut r = sine_record(4000.0, 50.0, 100);
        assert!(r.validate().is_err());
        r = sine_record(4000.0, 50.0, 200);
        r.validate().unwrap();
        r.i[2].pop();
        assert!(r.validate().is_err());
    }
}
