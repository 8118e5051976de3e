//! COMTRADE (IEEE C37.111) reader for 1999/2013 revisions and a 1999 ASCII writer.
//!
//! Only analog channels are read; digital/status channels are skipped.

use regex::Regex;

use super::WaveformRecord;
use crate::error::{Error, Result};

/// Full-scale integer used by the exporter.
const EXPORT_FULL_SCALE: f64 = 2.0e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Revision {
    R1999,
    R2013,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DataFormat {
    Ascii,
    Binary,
}

#[derive(Debug, Clone)]
pub struct AnalogChannel {
    pub index: usize,
    pub id: String,
    pub phase: String,
    pub units: String,
    pub a: f64,
    pub b: f64,
    pub primary: f64,
    pub secondary: f64,
    pub ps: char,
}

impl AnalogChannel {
    /// Multiplier applied after `a*x+b` to land in volts/amperes on the primary side.
    fn unit_factor(&self) -> f64 {
        let u = self.units.trim();
        let prefix = match u.chars().next() {
            Some('k') | Some('K') if u.len() > 1 => 1e3,
            Some('M') if u.len() > 1 => 1e6,
            Some('m') if u.len() > 1 => 1e-3,
            _ => 1.0,
        };
        let ratio = if self.ps.eq_ignore_ascii_case(&'s') && self.secondary != 0.0 {
            self.primary / self.secondary
        } else {
            1.0
        };
        prefix * ratio
    }

    fn scale(&self, raw: f64) -> f64 {
        (self.a * raw + self.b) * self.unit_factor()
    }

    fn quantity_letter(&self) -> Option<char> {
        let u = self.units.trim();
        let base = u.trim_start_matches(['k', 'K', 'M', 'm']);
        match base {
            "V" | "v" => Some('V'),
            "A" | "a" => Some('I'),
            _ => None,
        }
    }
}

/// Parsed configuration file.
#[derive(Debug, Clone)]
pub struct ComtradeConfig {
    pub station_name: String,
    pub device_id: String,
    pub revision: Revision,
    pub analog: Vec<AnalogChannel>,
    pub digital_count: usize,
    pub line_frequency: f64,
    pub sample_rate: Option<f64>,
    pub end_sample: usize,
    pub start_time: Option<f64>,
    pub trigger_time: Option<f64>,
    data_format: DataFormat,
    pub time_multiplier: f64,
}

/// Regular expressions identifying the six phase channels by name.
#[derive(Debug, Clone)]
pub struct ChannelMatcher {
    pub patterns: [Regex; 6],
}

const CHANNEL_KEYS: [&str; 6] = ["VA", "VB", "VC", "IA", "IB", "IC"];

impl Default for ChannelMatcher {
    fn default() -> Self {
        let mk = |q: &str, ph: &str| {
            Regex::new(&format!(
                r"(?i)^\s*{q}[\s_\-.]*(?:{ph})(?:[\s_\-.]*(?:n|g|0))?\s*$"
            ))
            .expect("static regex")
        };
        let (qv, qi) = ("(?:u|v)", "i");
        let (a, b, c) = ("a|l1|r", "b|l2|s", "c|l3|t");
        ChannelMatcher {
            patterns: [
                mk(qv, a),
                mk(qv, b),
                mk(qv, c),
                mk(qi, a),
                mk(qi, b),
                mk(qi, c),
            ],
        }
    }
}

impl ChannelMatcher {
    /// Returns, for VA..IC, the position of the matching analog channel.
    ///
    /// The channel id is tried first. When no channel id matches, a label
    /// composed from the unit (V/A) and the phase field is tried instead.
    pub fn assign(&self, channels: &[AnalogChannel]) -> Result<[usize; 6]> {
        let mut out = [0usize; 6];
        for (slot, re) in self.patterns.iter().enumerate() {
            let by_id: Vec<usize> = channels
                .iter()
                .enumerate()
                .filter(|(_, c)| re.is_match(&c.id))
                .map(|(k, _)| k)
                .collect();
            let hits = if by_id.is_empty() {
                channels
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| {
                        c.quantity_letter()
                            .map(|q| re.is_match(&format!("{q}{}", c.phase.trim())))
                            .unwrap_or(false)
                    })
                    .map(|(k, _)| k)
                    .collect()
            } else {
                by_id
            };
            match hits.as_slice() {
                [one] => out[slot] = *one,
                [] => {
                    return Err(Error::Channel(format!(
                        "no analog channel matches {}",
                        CHANNEL_KEYS[slot]
                    )))
                }
                many => {
                    let names: Vec<&str> = many.iter().map(|&k| channels[k].id.as_str()).collect();
                    return Err(Error::Channel(format!(
                        "{} is ambiguous: {:?}",
                        CHANNEL_KEYS[slot], names
                    )));
                }
            }
        }
        Ok(out)
    }
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected number for {what}, got '{s}'"),
    })
}

fn parse_usize(s: &str, line: usize, what: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected integer for {what}, got '{s}'"),
    })
}

/// Seconds since 0000-03-01 for a `dd/mm/yyyy,hh:mm:ss.ffffff` stamp.
fn parse_timestamp(line: &str) -> Option<f64> {
    let (date, time) = line.split_once(',')?;
    let mut d = date.trim().split('/');
    let day: i64 = d.next()?.trim().parse().ok()?;
    let month: i64 = d.next()?.trim().parse().ok()?;
    let year: i64 = d.next()?.trim().parse().ok()?;
    let mut t = time.trim().split(':');
    let h: f64 = t.next()?.trim().parse().ok()?;
    let m: f64 = t.next()?.trim().parse().ok()?;
    let s: f64 = t.next()?.trim().parse().ok()?;
    // Days from civil date (proleptic Gregorian).
    let (y, mo) = if month <= 2 {
        (year - 1, month + 9)
    } else {
        (year, month - 3)
    };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let doy = (153 * mo + 2) / 5 + day - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    let days = era * 146_097 + doe;
    Some(days as f64 * 86_400.0 + h * 3600.0 + m * 60.0 + s)
}

pub fn parse_config(cfg_text: &[u8]) -> Result<ComtradeConfig> {
    let text = String::from_utf8_lossy(cfg_text);
    let lines: Vec<&str> = text.lines().collect();
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let l = lines.get(pos).copied().ok_or_else(|| Error::Parse {
            line: pos + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        pos += 1;
        Ok((pos, l))
    };

    let (ln, l) = next("station line")?;
    let f = fields(l);
    let revision = match f.get(2).copied() {
        Some("1999") => Revision::R1999,
        Some("2013") => Revision::R2013,
        Some(other) if !other.is_empty() => {
            return Err(Error::UnsupportedVersion(other.to_string()))
        }
        _ => return Err(Error::UnsupportedVersion("1991 (no revision year)".into())),
    };
    let station_name = f.first().copied().unwrap_or_default().to_string();
    let device_id = f.get(1).copied().unwrap_or_default().to_string();
    let _ = ln;

    let (ln, l) = next("channel count line")?;
    let f = fields(l);
    if f.len() < 3 {
        return Err(Error::Parse {
            line: ln,
            msg: "channel count line needs TT,##A,##D".into(),
        });
    }
    let total = parse_usize(f[0], ln, "total channels")?;
    let n_analog = parse_usize(f[1].trim_end_matches(['A', 'a']), ln, "analog count")?;
    let n_digital = parse_usize(f[2].trim_end_matches(['D', 'd']), ln, "digital count")?;
    if total != n_analog + n_digital {
        return Err(Error::Parse {
            line: ln,
            msg: format!("total {total} != {n_analog}A + {n_digital}D"),
        });
    }

    let mut analog = Vec::with_capacity(n_analog);
    for _ in 0..n_analog {
        let (ln, l) = next("analog channel line")?;
        let f = fields(l);
        if f.len() < 10 {
            return Err(Error::Parse {
                line: ln,
                msg: format!(
                    "analog channel line has {} fields, need at least 10",
                    f.len()
                ),
            });
        }
        analog.push(AnalogChannel {
            index: parse_usize(f[0], ln, "channel index")?,
            id: f[1].to_string(),
            phase: f[2].to_string(),
            units: f[4].to_string(),
            a: parse_f64(f[5], ln, "multiplier a")?,
            b: parse_f64(f[6], ln, "offset b")?,
            primary: f
                .get(10)
                .map(|s| parse_f64(s, ln, "primary"))
                .transpose()?
                .unwrap_or(1.0),
            secondary: f
                .get(11)
                .map(|s| parse_f64(s, ln, "secondary"))
                .transpose()?
                .unwrap_or(1.0),
            ps: f.get(12).and_then(|s| s.chars().next()).unwrap_or('P'),
        });
    }
    for _ in 0..n_digital {
        next("digital channel line")?;
    }

    let (ln, l) = next("line frequency")?;
    let line_frequency = parse_f64(l, ln, "line frequency")?;

    let (ln, l) = next("sample rate count")?;
    let nrates = parse_usize(l, ln, "nrates")?;
    let mut rates = Vec::new();
    let mut end_sample = 0usize;
    for _ in 0..nrates.max(1) {
        let (ln, l) = next("sample rate line")?;
        let f = fields(l);
        if f.len() < 2 {
            return Err(Error::Parse {
                line: ln,
                msg: "sample rate line needs samp,endsamp".into(),
            });
        }
        rates.push(parse_f64(f[0], ln, "sample rate")?);
        end_sample = parse_usize(f[1], ln, "end sample")?;
    }
    let sample_rate = if nrates == 0 {
        None
    } else {
        let r0 = rates[0];
        if rates.iter().any(|r| (r - r0).abs() > 1e-6 * r0) {
            return Err(Error::Structure(
                "multiple sample rates in one record are not supported".into(),
            ));
        }
        Some(r0)
    };

    let (_, l) = next("start time")?;
    let start_time = parse_timestamp(l);
    let (_, l) = next("trigger time")?;
    let trigger_time = parse_timestamp(l);

    let (ln, l) = next("data file type")?;
    let data_format = match l.trim().to_ascii_uppercase().as_str() {
        "ASCII" => DataFormat::Ascii,
        "BINARY" => DataFormat::Binary,
        other @ ("BINARY32" | "FLOAT32") => {
            return Err(Error::UnsupportedVersion(format!("data file type {other}")))
        }
        other => {
            return Err(Error::Parse {
                line: ln,
                msg: format!("unknown data file type '{other}'"),
            })
        }
    };
    let time_multiplier = match lines.get(pos) {
        Some(l) if !l.trim().is_empty() => {
            let ln = pos + 1;
            parse_f64(l, ln, "time multiplier")?
        }
        _ => 1.0,
    };

    Ok(ComtradeConfig {
        station_name,
        device_id,
        revision,
        analog,
        digital_count: n_digital,
        line_frequency,
        sample_rate,
        end_sample,
        start_time,
        trigger_time,
        data_format,
        time_multiplier,
    })
}

/// Raw analog samples (unscaled) and timestamps in microseconds.
struct RawData {
    timestamps: Vec<f64>,
    analog: Vec<Vec<f64>>,
}

fn read_ascii(cfg: &ComtradeConfig, dat: &[u8]) -> Result<RawData> {
    let text = String::from_utf8_lossy(dat);
    let na = cfg.analog.len();
    let mut out = RawData {
        timestamps: Vec::new(),
        analog: vec![Vec::new(); na],
    };
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(line);
        let expected = 2 + na + cfg.digital_count;
        if f.len() != expected {
            return Err(Error::Structure(format!(
                "data line {} has {} fields, configuration implies {}",
                k + 1,
                f.len(),
                expected
            )));
        }
        let ts = if f[1].is_empty() {
            f64::NAN
        } else {
            parse_f64(f[1], k + 1, "timestamp")?
        };
        out.timestamps.push(ts);
        for (c, col) in out.analog.iter_mut().enumerate() {
            let s = f[2 + c];
            // Missing data is marked by an empty field or 99999.
            let v = if s.is_empty() {
                f64::NAN
            } else {
                parse_f64(s, k + 1, "analog value")?
            };
            col.push(v);
        }
    }
    Ok(out)
}

fn read_binary(cfg: &ComtradeConfig, dat: &[u8]) -> Result<RawData> {
    let na = cfg.analog.len();
    let nd_words = cfg.digital_count.div_ceil(16);
    let rec_len = 8 + 2 * na + 2 * nd_words;
    if dat.len() % rec_len != 0 {
        return Err(Error::Structure(format!(
            "binary payload of {} bytes is not a multiple of the {rec_len}-byte record implied by the configuration",
            dat.len()
        )));
    }
    let n = dat.len() / rec_len;
    let mut out = RawData {
        timestamps: Vec::with_capacity(n),
        analog: vec![Vec::with_capacity(n); na],
    };
    for rec in dat.chunks_exact(rec_len) {
        let ts = u32::from_le_bytes(rec[4..8].try_into().unwrap());
        out.timestamps
            .push(if ts == u32::MAX { f64::NAN } else { ts as f64 });
        for (c, col) in out.analog.iter_mut().enumerate() {
            let o = 8 + 2 * c;
            let raw = i16::from_le_bytes(rec[o..o + 2].try_into().unwrap());
            col.push(if raw == i16::MIN {
                f64::NAN
            } else {
                raw as f64
            });
        }
    }
    Ok(out)
}

/// Parses a `.cfg`/`.dat` pair into a record using the default channel matcher.
pub fn parse_comtrade(cfg_text: &[u8], dat_payload: &[u8]) -> Result<WaveformRecord> {
    parse_comtrade_with(cfg_text, dat_payload, &ChannelMatcher::default())
}

pub fn parse_comtrade_with(
    cfg_text: &[u8],
    dat_payload: &[u8],
    matcher: &ChannelMatcher,
) -> Result<WaveformRecord> {
    let cfg = parse_config(cfg_text)?;
    let raw = match cfg.data_format {
        DataFormat::Ascii => read_ascii(&cfg, dat_payload)?,
        DataFormat::Binary => read_binary(&cfg, dat_payload)?,
    };
    let n = raw.timestamps.len();
    if cfg.end_sample != 0 && cfg.end_sample != n {
        return Err(Error::Structure(format!(
            "configuration declares {} samples, data holds {n}",
            cfg.end_sample
        )));
    }
    let sample_rate = match cfg.sample_rate {
        Some(r) if r > 0.0 => r,
        _ => {
            // Rate from timestamps when the configuration gives none.
            if n < 2 || raw.timestamps.iter().any(|t| t.is_nan()) {
                return Err(Error::Structure(
                    "no sample rate and unusable timestamps".into(),
                ));
            }
            let span = (raw.timestamps[n - 1] - raw.timestamps[0]) * cfg.time_multiplier * 1e-6;
            let dt = span / (n - 1) as f64;
            for w in raw.timestamps.windows(2) {
                let step = (w[1] - w[0]) * cfg.time_multiplier * 1e-6;
                if (step - dt).abs() > 1e-6 * dt.max(1e-6) + 1e-6 {
                    return Err(Error::Structure("non-uniform timestamps".into()));
                }
            }
            1.0 / dt
        }
    };
    let slots = matcher.assign(&cfg.analog)?;
    let chan = |slot: usize| -> Result<Vec<f64>> {
        let c = &cfg.analog[slots[slot]];
        let col = &raw.analog[slots[slot]];
        if col.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidRecord(format!(
                "missing samples in channel {}",
                c.id
            )));
        }
        Ok(col.iter().map(|&x| c.scale(x)).collect())
    };
    let trigger_index = match (cfg.start_time, cfg.trigger_time) {
        (Some(s), Some(t)) if t >= s => {
            let k = ((t - s) * sample_rate).round() as usize;
            (k < n).then_some(k)
        }
        _ => None,
    };
    let base_frequency = if (cfg.line_frequency - 60.0).abs() < 1e-9 {
        60.0
    } else {
        50.0
    };
    if (cfg.line_frequency - base_frequency).abs() > 1e-9 {
        return Err(Error::InvalidRecord(format!(
            "line frequency {} Hz not supported",
            cfg.line_frequency
        )));
    }
    Ok(WaveformRecord {
        station_id: cfg.station_name.clone(),
        base_frequency,
        sample_rate,
        v: [chan(0)?, chan(1)?, chan(2)?],
        i: [chan(3)?, chan(4)?, chan(5)?],
        trigger_index,
    })
}

fn format_timestamp(seconds: f64) -> String {
    let total_us = (seconds * 1e6).round() as i64;
    let us = total_us % 1_000_000;
    let s = total_us / 1_000_000;
    format!(
        "01/01/2000,{:02}:{:02}:{:02}.{:06}",
        s / 3600,
        (s / 60) % 60,
        s % 60,
        us
    )
}

/// Writes a 1999-revision ASCII `.cfg`/`.dat` pair.
///
/// Channels are quantized to integers spanning +/-2e9 so the pair inverts to
/// well under 1e-6 of each channel's peak.
pub fn export_comtrade(record: &WaveformRecord) -> Result<(String, String)> {
    let n = record.len();
    if n == 0 {
        return Err(Error::InvalidRecord("cannot export an empty record".into()));
    }
    if record.channels().iter().any(|c| c.len() != n) {
        return Err(Error::InvalidRecord("channel lengths differ".into()));
    }
    if !(record.sample_rate > 0.0) {
        return Err(Error::InvalidRecord("sample rate must be positive".into()));
    }
    let station = if record.station_id.is_empty() {
        "faultloc".to_string()
    } else {
        record.station_id.replace(',', " ")
    };
    let names = ["VA", "VB", "VC", "IA", "IB", "IC"];
    let phases = ["A", "B", "C", "A", "B", "C"];
    let units = ["V", "V", "V", "A", "A", "A"];
    let scales: Vec<f64> = record
        .channels()
        .iter()
        .map(|c| {
            let peak = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if peak > 0.0 {
                peak / EXPORT_FULL_SCALE
            } else {
                1.0
            }
        })
        .collect();

    let mut cfg = String::new();
    cfg.push_str(&format!("{station},faultloc,1999\n"));
    cfg.push_str("6,6A,0D\n");
    for k in 0..6 {
        cfg.push_str(&format!(
            "{},{},{},,{},{:.17e},0,0,{},{},1,1,P\n",
            k + 1,
            names[k],
            phases[k],
            units[k],
            scales[k],
            -EXPORT_FULL_SCALE as i64,
            EXPORT_FULL_SCALE as i64
        ));
    }
    cfg.push_str(&format!("{}\n", record.base_frequency));
    cfg.push_str("1\n");
    cfg.push_str(&format!("{},{}\n", record.sample_rate, n));
    cfg.push_str(&format!("{}\n", format_timestamp(0.0)));
    let trig = record.trigger_index.unwrap_or(0) as f64 / record.sample_rate;
    cfg.push_str(&format!("{}\n", format_timestamp(trig)));
    cfg.push_str("ASCII\n");
    cfg.push_str("1\n");

    let mut dat = String::with_capacity(n * 80);
    let chans = record.channels();
    for k in 0..n {
        let ts = (k as f64 * 1e6 / record.sample_rate).round() as i64;
        dat.push_str(&format!("{},{}", k + 1, ts));
        for c in 0..6 {
            let q = (chans[c][k] / scales[c]).round() as i64;
            dat.push_str(&format!(",{q}"));
        }
        dat.push('\n');
    }
    Ok((cfg, dat))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN_CFG: &str = "STN,DEV,1999\n\
6,6A,0D\n\
1,UA,A,,V,1,0,0,-99999,99999,1,1,P\n\
2,UB,B,,V,1,0,0,-99999,99999,1,1,P\n\
3,UC,C,,V,1,0,0,-99999,99999,1,1,P\n\
4,IA,A,,A,1,0,0,-99999,99999,1,1,P\n\
5,IB,B,,A,1,0,0,-99999,99999,1,1,P\n\
6,IC,C,,A,1,0,0,-99999,99999,1,1,P\n\
50\n\
1\n\
4000,2\n\
01/01/2020,00:00:00.000000\n\
01/01/2020,00:00:00.000250\n\
ASCII\n\
1\n";

    const MIN_DAT: &str = "1,0,10,20,30,-1,-2,-3\n2,250,11,21,31,-4,-5,-6\n";

    #[test]
    fn minimal_ascii_verbatim() {
        let r = parse_comtrade(MIN_CFG.as_bytes(), MIN_DAT.as_bytes()).unwrap();
        assert_eq!(r.v[0], vec![10.0, 11.0]);
        assert_eq!(r.v[2], vec![30.0, 31.0]);
        assert_eq!(r.i[1], vec![-2.0, -5.0]);
        assert_eq!(r.sample_rate, 4000.0);
        assert_eq!(r.base_frequency, 50.0);
        assert_eq!(r.trigger_index, Some(1));
        assert_eq!(r.station_id, "STN");
    }

    #[test]
    fn multiplier_and_offset() {
        let cfg = MIN_CFG.replace("1,UA,A,,V,1,0,", "1,UA,A,,V,0.5,10,");
        let r = parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()).unwrap();
        assert_eq!(r.v[0], vec![0.5 * 10.0 + 10.0, 0.5 * 11.0 + 10.0]);
        assert_eq!(r.v[1], vec![20.0, 21.0]);
    }

    #[test]
    fn kilo_units_and_secondary_values() {
        let cfg = MIN_CFG
            .replace(
                "1,UA,A,,V,1,0,0,-99999,99999,1,1,P",
                "1,UA,A,,kV,1,0,0,-99999,99999,1,1,P",
            )
            .replace(
                "4,IA,A,,A,1,0,0,-99999,99999,1,1,P",
                "4,IA,A,,A,1,0,0,-99999,99999,1200,5,S",
            );
        let r = parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()).unwrap();
        assert_eq!(r.v[0][0], 10_000.0);
        assert_eq!(r.i[0][0], -240.0);
    }

    #[test]
    fn malformed_line_reports_number() {
        let cfg = MIN_CFG.replace("3,UC,C,,V,1,0,", "3,UC,C,,V,x,0,");
        match parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()) {
            Err(Error::Parse { line: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn channel_count_mismatch_is_structural() {
        let dat = "1,0,10,20,30,-1,-2\n";
        assert!(matches!(
            parse_comtrade(MIN_CFG.as_bytes(), dat.as_bytes()),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn old_revision_rejected() {
        let cfg = MIN_CFG.replace("STN,DEV,1999", "STN,DEV");
        assert!(matches!(
            parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()),
            Err(Error::UnsupportedVersion(_))
        ));
        let cfg = MIN_CFG.replace("STN,DEV,1999", "STN,DEV,2017");
        assert!(matches!(
            parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()),
            Err(Error::UnsupportedVersion(_))
        ));
    }

    #[test]
    fn ambiguous_channels_rejected() {
        let cfg = MIN_CFG.replace("2,UB,B,", "2,VA,B,");
        assert!(matches!(
            parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()),
            Err(Error::Channel(_))
        ));
    }

    #[test]
    fn phase_field_fallback() {
        let cfg = MIN_CFG
            .replace("1,UA,A,", "1,BUS VOLT,A,")
            .replace("2,UB,B,", "2,BUS VOLT,B,")
            .replace("3,UC,C,", "3,BUS VOLT,C,")
            .replace("4,IA,A,", "4,LINE AMPS,A,")
            .replace("5,IB,B,", "5,LINE AMPS,B,")
            .replace("6,IC,C,", "6,LINE AMPS,C,");
        let r = parse_comtrade(cfg.as_bytes(), MIN_DAT.as_bytes()).unwrap();
        assert_eq!(r.v[1], vec![20.0, 21.0]);
        assert_eq!(r.i[2], vec![-3.0, -6.0]);
    }

    #[test]
    fn binary_payload() {
        let cfg = MIN_CFG.replace("ASCII", "BINARY");
        let mut dat = Vec::new();
        for (k, vals) in [[10i16, 20, 30, -1, -2, -3], [11, 21, 31, -4, -5, -6]]
            .iter()
            .enumerate()
        {
            dat.extend_from_slice(&(k as u32 + 1).to_le_bytes());
            dat.extend_from_slice(&(k as u32 * 250).to_le_bytes());
            for v in vals {
                dat.extend_from_slice(&v.to_le_bytes());
            }
        }
        let r = parse_comtrade(cfg.as_bytes(), &dat).unwrap();
        assert_eq!(r.v[0], vec![10.0, 11.0]);
        assert_eq!(r.i[2], vec![-3.0, -6.0]);
        assert!(matches!(
            parse_comtrade(cfg.as_bytes(), &dat[..dat.len() - 1]),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn export_states_rate_and_rejects_empty() {
        let mut r = parse_comtrade(MIN_CFG.as_bytes(), MIN_DAT.as_bytes()).unwrap();
        r.sample_rate = 5000.0;
        let (cfg, _) = export_comtrade(&r).unwrap();
        assert!(cfg.lines().any(|l| l == "5000,2"), "{cfg}");

        let empty = WaveformRecord {
            station_id: String::new(),
            base_frequency: 50.0,
            sample_rate: 4000.0,
            v: Default::default(),
            i: Default::default(),
            trigger_index: None,
        };
        assert!(export_comtrade(&empty).is_err());
    }
}
