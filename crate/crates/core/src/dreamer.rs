//! Closed-loop hallucination: feed each sampled latent back as the next
//! input, recording mixture weights, the component that produced every
//! step, and the events detected in the decoded frames.

use std::path::{Path, PathBuf};

use crate::analysis::{detect_events, DetectorConfig, EventFlags};
use crate::mdrnn::{
    lstm_step, mdn_head, sample_component, sample_mixture, step_input, MdrnnParams, MdrnnState,
    SamplerConfig,
};
use crate::minicover::{render, step, Action, EnvConfig, Frame, WorldState};
use crate::numcore::{argmax, softmax, Rng};
use crate::vae::{decode_frame, encode, VaeParams};
use crate::{Error, Result};

/// Component selection policy for a whole dream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DreamMode {
    /// Sample the component from the pi-temperature softmax each step.
    Free,
    /// Force this component at every step; only the Gaussian draw is
    /// stochastic.
    Committed(usize),
}

/// Per-step record of a dream.
#[derive(Debug, Clone, PartialEq)]
pub struct DreamStep {
    /// The sampled latent fed back as the next input.
    pub z: Vec<f64>,
    /// Mixture weights at the sampling temperature, recorded before the draw.
    pub pi: Vec<f64>,
    pub argmax_component: usize,
    pub sampled_component: usize,
    pub action: u8,
    pub events: EventFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DreamTrace {
    pub model_id: String,
    pub dream_seed: u64,
    pub mode: DreamMode,
    pub pi_temperature: f64,
    pub sigma_temperature: f64,
    pub components: usize,
    pub latent: usize,
    pub steps: Vec<DreamStep>,
    /// Decoded frames; dropped when `keep_frames` is off (events are
    /// always retained).
    pub frames: Option<Vec<Frame>>,
}

impl DreamTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DreamSettings {
    pub steps: usize,
    pub sampler: SamplerConfig,
    pub mode: DreamMode,
    pub keep_frames: bool,
}

impl Default for DreamSettings {
    fn default() -> Self {
        DreamSettings {
            steps: 500,
            sampler: SamplerConfig::default(),
            mode: DreamMode::Free,
            keep_frames: false,
        }
    }
}

/// Roll one dream out of `z0` (the encoding of a real frame).
///
/// The recurrent state starts at zero. Each step draws a uniform random
/// action, advances the LSTM, records the temperature-scaled mixture
/// weights, samples a latent (free or committed), decodes it, and scans
/// the decoded frame for events against the previous decoded frame.
pub fn dream(
    vae: &VaeParams,
    mdrnn: &MdrnnParams,
    z0: &[f64],
    settings: &DreamSettings,
    detector: &DetectorConfig,
    seed: u64,
    model_id: &str,
) -> Result<DreamTrace> {
    settings.sampler.validate()?;
    if settings.steps == 0 {
        return Err(Error::Parameter("dream: steps must be >= 1".into()));
    }
    let k = mdrnn.arch.components;
    if let DreamMode::Committed(component) = settings.mode {
        if component >= k {
            return Err(Error::Parameter(format!(
                "dream: committed component {component} out of range for K={k}"
            )));
        }
    }
    if z0.len() != mdrnn.arch.latent || vae.arch.latent != mdrnn.arch.latent {
        return Err(Error::Parameter(format!(
            "dream: latent dims disagree (z0 {}, vae {}, mdrnn {})",
            z0.len(),
            vae.arch.latent,
            mdrnn.arch.latent
        )));
    }

    let mut rng = Rng::new(seed);
    let mut state = MdrnnState::zero(mdrnn.arch.hidden);
    let mut z = z0.to_vec();
    let mut prev_frame: Option<Frame> = None;
    let mut steps = Vec::with_capacity(settings.steps);
    let mut frames = settings.keep_frames.then(|| Vec::with_capacity(settings.steps));

    for _ in 0..settings.steps {
        let action = rng.next_below(3) as u8;
        let x = step_input(&z, action);
        state = lstm_step(&x, &state, mdrnn);
        let mix = mdn_head(&state.h, mdrnn);
        let pi = softmax(&mix.logits, settings.sampler.pi_temperature)?;
        let argmax_component = argmax(&pi);

        let (sampled_component, next_z) = match settings.mode {
            DreamMode::Free => sample_mixture(&mix, &settings.sampler, &mut rng)?,
            DreamMode::Committed(component) => {
                let z = sample_component(&mix, component, settings.sampler.sigma_temperature, &mut rng)?;
                (component, z)
            }
        };
        z = next_z;

        let frame = decode_frame(&z, vae)?;
        let events = detect_events(&frame, prev_frame.as_ref(), detector);
        steps.push(DreamStep {
            z: z.clone(),
            pi,
            argmax_component,
            sampled_component,
            action,
            events,
        });
        if let Some(frames) = frames.as_mut() {
            frames.push(frame.clone());
        }
        prev_frame = Some(frame);
    }

    Ok(DreamTrace {
        model_id: model_id.to_string(),
        dream_seed: seed,
        mode: settings.mode,
        pi_temperature: settings.sampler.pi_temperature,
        sigma_temperature: settings.sampler.sigma_temperature,
        components: k,
        latent: mdrnn.arch.latent,
        steps,
        frames,
    })
}

/// A VAE + MD-RNN pair ready to dream.
#[derive(Debug, Clone)]
pub struct Model {
    pub id: String,
    pub vae: VaeParams,
    pub mdrnn: MdrnnParams,
}

impl Model {
    /// Load `vae` and `mdrnn` checkpoints from a model directory; the
    /// directory name becomes the model id.
    pub fn load(dir: &Path) -> Result<Model> {
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        let vae = crate::persist::load_vae(&dir.join("vae"))?;
        let mdrnn = crate::persist::load_mdrnn(&dir.join("mdrnn"))?;
        Ok(Model { id, vae, mdrnn })
    }
}

/// Generate `dreams_per_model` dreams for each model directory.
///
/// Dream (m, i) runs on the child stream `fork(fork(seed, m), i)`: one
/// sub-stream warms up a real environment rollout whose final frame is
/// encoded into z0, the other seeds the dream itself.
pub fn dream_batch(
    model_dirs: &[PathBuf],
    dreams_per_model: usize,
    settings: &DreamSettings,
    detector: &DetectorConfig,
    env: &EnvConfig,
    seed: u64,
) -> Result<Vec<DreamTrace>> {
    let models: Result<Vec<Model>> = model_dirs.iter().map(|d| Model::load(d)).collect();
    dream_batch_loaded(&models?, dreams_per_model, settings, detector, env, seed)
}

pub fn dream_batch_loaded(
    models: &[Model],
    dreams_per_model: usize,
    settings: &DreamSettings,
    detector: &DetectorConfig,
    env: &EnvConfig,
    seed: u64,
) -> Result<Vec<DreamTrace>> {
    let root = Rng::new(seed);
    let mut traces = Vec::with_capacity(models.len() * dreams_per_model);
    for (m, model) in models.iter().enumerate() {
        let model_rng = root.fork(m as u64);
        for i in 0..dreams_per_model {
            let dream_rng = model_rng.fork(i as u64);
            let mut warm_rng = dream_rng.fork(0);
            let dream_seed = dream_rng.fork(1).state();

            let z0 = warm_start_latent(&model.vae, env, &mut warm_rng);
            traces.push(dream(
                &model.vae,
                &model.mdrnn,
                &z0,
                settings,
                detector,
                dream_seed,
                &model.id,
            )?);
        }
    }
    Ok(traces)
}

/// Simulate a short random rollout and encode its final frame: the real
/// initial state a dream grows from.
fn warm_start_latent(vae: &VaeParams, env: &EnvConfig, rng: &mut Rng) -> Vec<f64> {
    let warm_steps = 20 + rng.next_below(60) as u32;
    let mut state = WorldState::new();
    for _ in 0..warm_steps {
        let action = Action::from_code(rng.next_below(3) as u8).expect("range 0..3");
        let next = step(&state, action, rng, env);
        if next.terminated {
            break;
        }
        state = next;
    }
    let frame = render(&state);
    encode(&frame, vae).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdrnn::MdrnnArch;
    use crate::vae::VaeArch;

    fn test_model(seed: u64) -> Model {
        let mut rng = Rng::new(seed);
        let vae_arch = VaeArch { input: 1024, hidden1: 16, hidden2: 8, latent: 4 };
        let mdrnn_arch = MdrnnArch { latent: 4, hidden: 8, components: 3 };
        Model {
            id: format!("model{seed}"),
            vae: VaeParams::init(&mut rng, vae_arch),
            mdrnn: MdrnnParams::init(&mut rng, mdrnn_arch),
        }
    }

    #[test]
    fn single_step_trace_has_all_fields() {
        let model = test_model(1);
        let settings = DreamSettings { steps: 1, keep_frames: true, ..Default::default() };
        let trace = dream(
            &model.vae,
            &model.mdrnn,
            &[0.0; 4],
            &settings,
            &DetectorConfig::default(),
            7,
            &model.id,
        )
        .unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.steps[0].pi.len(), 3);
        assert!((trace.steps[0].pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(trace.frames.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn committed_mode_pins_the_component() {
        let model = test_model(2);
        let settings =
            DreamSettings { steps: 100, mode: DreamMode::Committed(2), ..Default::default() };
        let trace = dream(
            &model.vae,
            &model.mdrnn,
            &[0.1; 4],
            &settings,
            &DetectorConfig::default(),
            8,
            &model.id,
        )
        .unwrap();
        assert!(trace.steps.iter().all(|s| s.sampled_component == 2));
    }

    #[test]
    fn committed_component_out_of_range_is_rejected() {
        let model = test_model(3);
        let settings = DreamSettings { mode: DreamMode::Committed(3), ..Default::default() };
        let err = dream(
            &model.vae,
            &model.mdrnn,
            &[0.0; 4],
            &settings,
            &DetectorConfig::default(),
            1,
            &model.id,
        );
        assert!(err.is_err());
    }

    #[test]
    fn dreams_are_bit_deterministic() {
        let model = test_model(4);
        let settings = DreamSettings { steps: 30, keep_frames: true, ..Default::default() };
        let run = || {
            dream(
                &model.vae,
                &model.mdrnn,
                &[0.2, -0.1, 0.0, 0.4],
                &settings,
                &DetectorConfig::default(),
                99,
                &model.id,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn recorded_pi_matches_weights_used_for_sampling() {
        // The recorded weights must be the softmax of the logits at the
        // sampling temperature; with a strongly dominant weight and tiny
        // sigma temperature the sampled component is the argmax.
        let model = test_model(5);
        let settings = DreamSettings {
            steps: 50,
            sampler: SamplerConfig { pi_temperature: 0.01, sigma_temperature: 1.0 },
            ..Default::default()
        };
        let trace = dream(
            &model.vae,
            &model.mdrnn,
            &[0.0; 4],
            &settings,
            &DetectorConfig::default(),
            3,
            &model.id,
        )
        .unwrap();
        for step in &trace.steps {
            let max_weight = step.pi.iter().cloned().fold(0.0, f64::max);
            if max_weight > 0.999 {
                assert_eq!(step.sampled_component, step.argmax_component);
            }
        }
    }

    #[test]
    fn batch_shapes_and_distinct_traces() {
        let models = vec![test_model(6), test_model(7)];
        let settings = DreamSettings { steps: 20, ..Default::default() };
        let traces = dream_batch_loaded(
            &models,
            3,
            &settings,
            &DetectorConfig::default(),
            &EnvConfig::default(),
            42,
        )
        .unwrap();
        assert_eq!(traces.len(), 6);
        assert!(traces.iter().all(|t| t.len() == 20));
        // Disjoint seeds: no two traces share a pi sequence.
        for a in 0..traces.len() {
            for b in a + 1..traces.len() {
                let same = traces[a]
                    .steps
                    .iter()
                    .zip(&traces[b].steps)
                    .all(|(x, y)| x.pi == y.pi);
                assert!(!same, "traces {a} and {b} have identical weight sequences");
            }
        }
    }

    #[test]
    fn missing_checkpoint_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("no-such-model");
        let err = Model::load(&missing).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("no-such-model"), "{message}");
    }
}
