use std::io::Write;
use std::path::Path as FsPath;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::levy::LevyMeasureSpec;
use super::rng::path_rng;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpClass {
    Small,
    Large,
}

impl JumpClass {
    pub fn as_str(self) -> &'static str {
        match self {
            JumpClass::Small => "small",
            JumpClass::Large => "large",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub mark: Vec<f64>,
    pub class: JumpClass,
}

/// One frozen draw of the jump noise on (0, T].
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    events: Vec<JumpEvent>,
    seed: u64,
    stream: u64,
    horizon: f64,
    spec: Arc<LevyMeasureSpec>,
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::domain(format!("poisson mean {mean}: {e}")))?;
    let n: f64 = dist.sample(rng);
    Ok(n as usize)
}

// uniform on (0, T]
fn event_time(rng: &mut ChaCha8Rng, horizon: f64) -> f64 {
    (1.0 - rng.random::<f64>()) * horizon
}

/// Samples the jumps of path 0 for `seed`.
pub fn sample_realization(spec: Arc<LevyMeasureSpec>, horizon: f64, seed: u64) -> Result<NoiseRealization> {
    sample_realization_stream(spec, horizon, seed, 0)
}

/// Samples the jumps of path `stream` of a run keyed by `seed`.
///
/// Large jumps are drawn first, so their times and marks do not depend on
/// the small-jump settings.
pub fn sample_realization_stream(
    spec: Arc<LevyMeasureSpec>,
    horizon: f64,
    seed: u64,
    stream: u64,
) -> Result<NoiseRealization> {
    spec.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = path_rng(seed, stream);
    let mut events = Vec::new();

    let n_large = poisson_count(&mut rng, spec.large_mass() * horizon)?;
    for _ in 0..n_large {
        let time = event_time(&mut rng, horizon);
        let mark = spec.sample_large_mark(&mut rng);
        events.push(JumpEvent {
            time,
            mark,
            class: JumpClass::Large,
        });
    }
    let n_small = poisson_count(&mut rng, spec.small_mass() * horizon)?;
    for _ in 0..n_small {
        let time = event_time(&mut rng, horizon);
        let mark = spec.sample_small_mark(&mut rng);
        events.push(JumpEvent {
            time,
            mark,
            class: JumpClass::Small,
        });
    }

    // Resample the later of two coincident times until all are distinct.
    loop {
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        let tie = events.windows(2).position(|w| w[0].time == w[1].time);
        match tie {
            Some(k) => events[k + 1].time = event_time(&mut rng, horizon),
            None => break,
        }
    }

    Ok(NoiseRealization {
        events,
        seed,
        stream,
        horizon,
        spec,
    })
}

impl NoiseRealization {
    /// A realization with the given events, sorted by time.
    pub fn from_events(spec: Arc<LevyMeasureSpec>, horizon: f64, mut events: Vec<JumpEvent>) -> Result<Self> {
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        for e in &events {
            if !(e.time > 0.0 && e.time <= horizon) {
                return Err(Error::domain(format!("event time {} outside (0, {horizon}]", e.time)));
            }
            if e.mark.len() != spec.mark_dim {
                return Err(Error::domain(format!(
                    "event mark {:?} has the wrong dimension",
                    e.mark
                )));
            }
        }
        if events.windows(2).any(|w| w[0].time == w[1].time) {
            return Err(Error::domain("event times must be distinct"));
        }
        Ok(Self {
            events,
            seed: 0,
            stream: 0,
            horizon,
            spec,
        })
    }

    /// No events at all.
    pub fn empty(spec: Arc<LevyMeasureSpec>, horizon: f64) -> Self {
        Self {
            events: Vec::new(),
            seed: 0,
            stream: 0,
            horizon,
            spec,
        }
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn spec(&self) -> &Arc<LevyMeasureSpec> {
        &self.spec
    }

    pub fn small_events(&self) -> impl Iterator<Item = &JumpEvent> {
        self.events.iter().filter(|e| e.class == JumpClass::Small)
    }

    pub fn large_events(&self) -> impl Iterator<Item = &JumpEvent> {
        self.events.iter().filter(|e| e.class == JumpClass::Large)
    }

    pub fn large_times(&self) -> Vec<f64> {
        self.large_events().map(|e| e.time).collect()
    }

    /// Same realization with the large jumps dropped.
    pub fn restrict_small(&self) -> Self {
        Self {
            events: self.small_events().cloned().collect(),
            ..self.clone()
        }
    }

    /// Writes `time, z1..zd, class`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.spec.mark_dim;
        let mut header = vec!["time".to_string()];
        header.extend((1..=d).map(|k| format!("z{k}")));
        header.push("class".into());
        w.write_record(&header)?;
        for e in &self.events {
            let mut row = vec![format!("{:e}", e.time)];
            row.extend(e.mark.iter().map(|x| format!("{x:e}")));
            row.push(e.class.as_str().into());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<FsPath>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{Atom, LargeJumpLaw, SmallJumpFamily};

    fn spec(small: SmallJumpFamily, large: LargeJumpLaw) -> Arc<LevyMeasureSpec> {
        Arc::new(LevyMeasureSpec::new(1, 0.01, small, large).unwrap())
    }

    #[test]
    fn empty_measure_gives_no_events() {
        let s = Arc::new(LevyMeasureSpec::none());
        let r = sample_realization(s, 3.0, 11).unwrap();
        assert!(r.events().is_empty());
    }

    #[test]
    fn reproducible_and_sorted() {
        let s = spec(
            SmallJumpFamily::StableLike { c: 1.0, beta: 0.5 },
            LargeJumpLaw::Pareto {
                mass: 2.0,
                tail_index: 2.5,
            },
        );
        let a = sample_realization_stream(s.clone(), 2.0, 42, 5).unwrap();
        let b = sample_realization_stream(s.clone(), 2.0, 42, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.events().windows(2).all(|w| w[0].time < w[1].time));
        assert!(a.events().iter().all(|e| e.time > 0.0 && e.time <= 2.0));
        for e in a.events() {
            let r = crate::noise::levy::norm(&e.mark);
            match e.class {
                JumpClass::Small => assert!((0.01..1.0).contains(&r)),
                JumpClass::Large => assert!(r >= 1.0),
            }
        }
        let c = sample_realization_stream(s, 2.0, 42, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn large_jumps_do_not_depend_on_small_family() {
        let large = LargeJumpLaw::Sphere { mass: 1.5, radius: 1.0 };
        let a = sample_realization(spec(SmallJumpFamily::None, large.clone()), 4.0, 9).unwrap();
        let b = sample_realization(spec(SmallJumpFamily::AnnulusUniform { mass: 20.0 }, large), 4.0, 9).unwrap();
        assert_eq!(a.large_times(), b.large_times());
    }

    #[test]
    fn large_count_mean_within_three_sigma() {
        let s = spec(SmallJumpFamily::None, LargeJumpLaw::Sphere { mass: 2.0, radius: 1.0 });
        let seeds = 10_000u64;
        let total: usize = (0..seeds)
            .map(|k| {
                sample_realization_stream(s.clone(), 5.0, 2024, k)
                    .unwrap()
                    .events()
                    .len()
            })
            .sum();
        let mean = total as f64 / seeds as f64;
        assert!((mean - 10.0).abs() < 3.0 * 10f64.sqrt() / 100.0, "{mean}");
    }

    #[test]
    fn restrict_and_csv() {
        let s = spec(
            SmallJumpFamily::FiniteAtoms {
                atoms: vec![Atom {
                    mark: vec![0.5],
                    weight: 3.0,
                }],
            },
            LargeJumpLaw::FiniteAtoms {
                atoms: vec![Atom {
                    mark: vec![-2.0],
                    weight: 1.0,
                }],
            },
        );
        let r = sample_realization(s, 2.0, 1).unwrap();
        let small = r.restrict_small();
        assert!(small.events().iter().all(|e| e.class == JumpClass::Small));
        assert_eq!(small.events().len(), r.small_events().count());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("time,z1,class"));
        assert_eq!(lines.count(), r.events().len());
    }

    #[test]
    fn from_events_validates() {
        let s = Arc::new(LevyMeasureSpec::none());
        let ev = |t| JumpEvent {
            time: t,
            mark: vec![1.0],
            class: JumpClass::Large,
        };
        assert!(NoiseRealization::from_events(s.clone(), 1.0, vec![ev(0.5), ev(0.2)]).is_ok());
        assert!(NoiseRealization::from_events(s.clone(), 1.0, vec![ev(0.5), ev(0.5)]).is_err());
        assert!(NoiseRealization::from_events(s, 1.0, vec![ev(1.5)]).is_err());
    }
}
