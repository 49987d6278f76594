//! Eddy-current signal chain: block lock-in demodulation, modulus,
//! moving-average smoothing, coil differencing and threshold events.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::sensors::RawECSignal;

/// Window of the smoothing filter applied to the modulus.
pub const DEFAULT_MA_WINDOW: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("block of {block} samples spans {periods} excitation periods, not an integer")]
    BlockAlignment { block: usize, periods: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("streams are not sample-aligned at index {0}")]
    Alignment(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IQSample {
    /// µs
    pub t: i64,
    pub i: f64,
    pub q: f64,
}

impl IQSample {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.i, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IQStream {
    pub samples: Vec<IQSample>,
    pub demod_freq: f64,
}

/// Real-valued stream sharing the IQ timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealStream {
    pub t: Vec<i64>,
    pub values: Vec<f64>,
}

impl RealStream {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Rising,
    Peak,
    Falling,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Rising => "rising",
            EventKind::Peak => "peak",
            EventKind::Falling => "falling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: i64,
    /// Index into the source stream.
    pub index: usize,
    pub kind: EventKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EventList {
    pub events: Vec<Event>,
}

/// Block-integrating lock-in.
///
/// For each block of `block` samples, `i = 2/N·Σ s·sin(2πft)` and
/// `q = 2/N·Σ s·cos(2πft)`, so `A·sin(2πft + φ)` demodulates to modulus
/// `A` and phase `φ`. The block must hold a whole number of periods.
/// Block timestamps are the rounded block centre.
pub fn lock_in_demodulate(
    raw: &RawECSignal,
    f_demod: f64,
    block: usize,
) -> Result<IQStream, DspError> {
    if block == 0 || !(f_demod > 0.0) || !(raw.sample_rate > 0.0) {
        return Err(DspError::Parameter(
            "block, demodulation and sample rates must be positive".into(),
        ));
    }
    let periods = block as f64 * f_demod / raw.sample_rate;
    if (periods - periods.round()).abs() > 1e-9 || periods.round() < 1.0 {
        return Err(DspError::BlockAlignment { block, periods });
    }
    let omega = 2.0 * PI * f_demod;
    let scale = 2.0 / block as f64;
    let samples = raw
        .samples
        .chunks_exact(block)
        .enumerate()
        .map(|(b, chunk)| {
            let first = b * block;
            let (mut i, mut q) = (0.0, 0.0);
            for (k, &s) in chunk.iter().enumerate() {
                let (sin, cos) = (omega * raw.time_s(first + k)).sin_cos();
                i += s * sin;
                q += s * cos;
            }
            let centre = raw.timestamp_us(first) + (block - 1) as f64 * 0.5e6 / raw.sample_rate;
            IQSample {
                t: centre.round() as i64,
                i: i * scale,
                q: q * scale,
            }
        })
        .collect();
    Ok(IQStream {
        samples,
        demod_freq: f_demod,
    })
}

pub fn modulus(stream: &IQStream) -> RealStream {
    RealStream {
        t: stream.samples.iter().map(|s| s.t).collect(),
        values: stream.samples.iter().map(|s| s.i.hypot(s.q)).collect(),
    }
}

/// Causal moving average; the first `window - 1` outputs average the
/// available prefix.
pub fn moving_average(values: &[f64], window: usize) -> Result<Vec<f64>, DspError> {
    if window == 0 {
        return Err(DspError::Parameter(
            "moving-average window must be >= 1".into(),
        ));
    }
    // direct summation keeps integer-valued inputs exact
    Ok((0..values.len())
        .map(|n| {
            let lo = (n + 1).saturating_sub(window);
            values[lo..=n].iter().sum::<f64>() / (n + 1 - lo) as f64
        })
        .collect())
}

pub fn moving_average_stream(stream: &RealStream, window: usize) -> Result<RealStream, DspError> {
    Ok(RealStream {
        t: stream.t.clone(),
        values: moving_average(&stream.values, window)?,
    })
}

/// Element-wise `a - b`.
pub fn differential(a: &IQStream, b: &IQStream) -> Result<IQStream, DspError> {
    if a.samples.len() != b.samples.len() {
        return Err(DspError::Alignment(a.samples.len().min(b.samples.len())));
    }
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .enumerate()
        .map(|(k, (x, y))| {
            if x.t != y.t {
                return Err(DspError::Alignment(k));
            }
            Ok(IQSample {
                t: x.t,
                i: x.i - y.i,
                q: x.q - y.q,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IQStream {
        samples,
        demod_freq: a.demod_freq,
    })
}

/// Hysteresis threshold detector.
///
/// A rising event fires when the value reaches `threshold` from below and
/// a falling event when it then drops under `threshold - hysteresis`. The
/// maximum in between is reported as a peak. A pulse still open at the end
/// of the stream yields its rising and peak events only.
pub fn detect_events(
    stream: &RealStream,
    threshold: f64,
    hysteresis: f64,
) -> Result<EventList, DspError> {
    if !(hysteresis >= 0.0) || !(threshold > hysteresis) {
        return Err(DspError::Parameter(
            "need threshold > hysteresis >= 0".into(),
        ));
    }
    let mut events = Vec::new();
    let mut peak: Option<(usize, f64)> = None;
    let mut prev = f64::NEG_INFINITY;
    for (k, &v) in stream.values.iter().enumerate() {
        match peak {
            None => {
                if v >= threshold && prev < threshold {
                    events.push(Event {
                        t: stream.t[k],
                        index: k,
                        kind: EventKind::Rising,
                        value: v,
                    });
                    peak = Some((k, v));
                }
            }
            Some((pk, pv)) => {
                if v < threshold - hysteresis {
                    events.push(Event {
                        t: stream.t[pk],
                        index: pk,
                        kind: EventKind::Peak,
                        value: pv,
                    });
                    events.push(Event {
                        t: stream.t[k],
                        index: k,
                        kind: EventKind::Falling,
                        value: v,
                    });
                    peak = None;
                } else if v > pv {
                    peak = Some((k, v));
                }
            }
        }
        prev = v;
    }
    if let Some((pk, pv)) = peak {
        events.push(Event {
            t: stream.t[pk],
            index: pk,
            kind: EventKind::Peak,
            value: pv,
        });
    }
    Ok(EventList { events })
}

/// Vertex of the parabola through three points around a maximum.
///
/// Collinear (or otherwise degenerate) triples return the middle abscissa.
pub fn refine_peak(points: [(f64, f64); 3]) -> f64 {
    let [(x0, y0), (x1, y1), (x2, y2)] = points;
    // divided differences of the interpolating quadratic
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !a.is_finite() || a.abs() < 1e-15 {
        return x1;
    }
    let b = d01 - a * (x0 + x1);
    let vertex = -b / (2.0 * a);
    if vertex.is_finite() {
        vertex
    } else {
        x1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tone(f: f64, fs: f64, n: usize, gen: impl Fn(f64) -> f64) -> RawECSignal {
        let mut raw = RawECSignal {
            sample_rate: fs,
            t0: 0,
            samples: Vec::new(),
            pose_track: Vec::new(),
        };
        raw.samples = (0..n).map(|k| gen(raw.time_s(k))).collect();
        let _ = f;
        raw
    }

    #[test]
    fn pure_sine() {
        let f = 1000.0;
        let raw = tone(f, 20_000.0, 200, |t| 3.0 * (2.0 * PI * f * t).sin());
        let iq = lock_in_demodulate(&raw, f, 20).unwrap();
        assert_eq!(iq.samples.len(), 10);
        for s in &iq.samples {
            assert_abs_diff_eq!(s.i, 3.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.q, 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(modulus(&iq).values[0], 3.0, epsilon = 1e-6);
        // centre of the first 20-sample block: 9.5 × 50 µs
        assert_eq!(iq.samples[0].t, 475);
    }

    #[test]
    fn pure_cosine_is_quadrature() {
        let f = 1000.0;
        let raw = tone(f, 20_000.0, 40, |t| 3.0 * (2.0 * PI * f * t).cos());
        let s = lock_in_demodulate(&raw, f, 20).unwrap().samples[0];
        assert_abs_diff_eq!(s.i.hypot(s.q), 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.q.atan2(s.i).to_degrees(), 90.0, epsilon = 1e-7);
    }

    /// Brute-force mixing integral over the block, evaluated independently.
    fn mixing_oracle(gen: &dyn Fn(f64) -> f64, f: f64, fs: f64, n: usize) -> (f64, f64) {
        let mut i = 0.0;
        let mut q = 0.0;
        for k in 0..n {
            let t = k as f64 / fs;
            let s = gen(t);
            i += s * (2.0 * PI * f * t).sin();
            q += s * (2.0 * PI * f * t).cos();
        }
        (2.0 * i / n as f64, 2.0 * q / n as f64)
    }

    #[test]
    fn harmonic_rejected_over_whole_block() {
        let f = 1000.0;
        let fs = 20_000.0;
        let gen =
            |t: f64| 2.0 * (2.0 * PI * f * t + 0.7).sin() + 0.5 * (2.0 * PI * 3.0 * f * t).sin();
        let (oi, oq) = mixing_oracle(&gen, f, fs, 20);
        assert_abs_diff_eq!(oi.hypot(oq), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(oq.atan2(oi), 0.7, epsilon = 1e-9);

        let raw = tone(f, fs, 20, gen);
        let s = lock_in_demodulate(&raw, f, 20).unwrap().samples[0];
        assert_abs_diff_eq!(s.i, oi, epsilon = 1e-12);
        assert_abs_diff_eq!(s.q, oq, epsilon = 1e-12);
        assert_abs_diff_eq!(s.i.hypot(s.q), 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.q.atan2(s.i), 0.7, epsilon = 1e-6);
    }

    #[test]
    fn misaligned_block() {
        let raw = tone(1000.0, 20_000.0, 100, |_| 0.0);
        assert!(matches!(
            lock_in_demodulate(&raw, 1000.0, 15),
            Err(DspError::BlockAlignment { .. })
        ));
    }

    #[test]
    fn modulus_cases() {
        let iq = IQStream {
            samples: vec![
                IQSample {
                    t: 0,
                    i: 3.0,
                    q: 4.0,
                },
                IQSample {
                    t: 1,
                    i: 0.0,
                    q: 0.0,
                },
            ],
            demod_freq: 1.0,
        };
        assert_eq!(modulus(&iq).values, vec![5.0, 0.0]);
    }

    #[test]
    fn moving_average_closed_forms() {
        assert_eq!(moving_average(&[2.5; 40], 15).unwrap(), vec![2.5; 40]);

        let mut impulse = vec![0.0; 40];
        impulse[0] = 1.0;
        let out = moving_average(&impulse, 15).unwrap();
        // warm-up averages the prefix, so the impulse response is 1/(n+1)
        // for n < 15 and zero afterwards
        for (n, &v) in out.iter().enumerate() {
            let expect = if n < 15 { 1.0 / (n + 1) as f64 } else { 0.0 };
            assert_eq!(v, expect);
        }
        // impulse arriving after warm-up: clean 1/15 plateau of 15 samples
        let mut late = vec![0.0; 60];
        late[20] = 1.0;
        let out = moving_average(&late, 15).unwrap();
        for (n, &v) in out.iter().enumerate() {
            let expect = if (20..35).contains(&n) {
                1.0 / 15.0
            } else {
                0.0
            };
            assert_eq!(v, expect, "n={n}");
        }

        let ramp: Vec<f64> = (0..100).map(f64::from).collect();
        let out = moving_average(&ramp, 15).unwrap();
        for (n, v) in out.iter().enumerate().skip(14) {
            assert_eq!(*v, n as f64 - 7.0);
        }
        assert!(matches!(
            moving_average(&ramp, 0),
            Err(DspError::Parameter(_))
        ));
    }

    #[test]
    fn differential_checks_alignment() {
        let a = IQStream {
            samples: vec![IQSample {
                t: 0,
                i: 1.0,
                q: 2.0,
            }],
            demod_freq: 1.0,
        };
        let b = IQStream {
            samples: vec![IQSample {
                t: 5,
                i: 1.0,
                q: 2.0,
            }],
            demod_freq: 1.0,
        };
        assert_eq!(differential(&a, &b), Err(DspError::Alignment(0)));
        let z = differential(&a, &a).unwrap();
        assert_eq!(z.samples[0].i, 0.0);
        assert_eq!(z.samples[0].q, 0.0);
    }

    fn stream(values: Vec<f64>) -> RealStream {
        RealStream {
            t: (0..values.len() as i64).collect(),
            values,
        }
    }

    #[test]
    fn events_on_bump() {
        assert!(detect_events(&stream(vec![0.1; 50]), 1.0, 0.2)
            .unwrap()
            .events
            .is_empty());
        let bump: Vec<f64> = (0..200)
            .map(|k| 2.0 * (-((k as f64 - 100.0) / 15.0).powi(2)).exp())
            .collect();
        let ev = detect_events(&stream(bump), 1.0, 0.2).unwrap().events;
        let kinds: Vec<EventKind> = ev.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![EventKind::Rising, EventKind::Peak, EventKind::Falling]
        );
        assert_eq!(ev[1].index, 100);
        assert!(ev.windows(2).all(|w| w[0].t <= w[1].t));
        assert!(detect_events(&stream(vec![0.0]), 0.1, 0.2).is_err());
    }

    #[test]
    fn parabola_vertex() {
        assert_eq!(refine_peak([(-1.0, 1.0), (0.0, 2.0), (1.0, 1.0)]), 0.0);
        // y = -0.75x² + 0.25x + 2 has its vertex at x = 1/6
        assert_abs_diff_eq!(
            refine_peak([(-1.0, 1.0), (0.0, 2.0), (1.0, 1.5)]),
            1.0 / 6.0,
            epsilon = 1e-12
        );
        assert_eq!(refine_peak([(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]), 1.0);
        assert_eq!(refine_peak([(0.0, 2.0), (1.0, 2.0), (2.0, 2.0)]), 1.0);
    }
}
