//! Memory model: single-layer LSTM with a mixture-density head over the
//! next latent vector.
//!
//! The head projects the hidden state to K component logits, K x D means,
//! and K x D raw scales; scales go through exp so they stay positive.
//! Training maximizes the mixture log-density of the next latent given the
//! current latent and a one-hot action, with truncated BPTT inside
//! episodes. Sampling draws a component from the temperature-scaled
//! softmax of the logits, then a diagonal Gaussian sample whose variance
//! is scaled by the sigma temperature.

use crate::numcore::{
    argmax, gaussian_sample, kernels, logsumexp, softmax, Adam, NodeId, Rng, Tape, Tensor,
};
use crate::vae::LatentDataset;
use crate::{Error, Result};

const ACTIONS: usize = 3;
const LN_2PI: f64 = 1.8378770664093453; // ln(2*pi)
/// Scale floor applied inside the NLL only, keeping log-densities finite
/// however small the head's raw outputs go.
const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdrnnArch {
    /// Latent dimension D (matches the VAE).
    pub latent: usize,
    /// Hidden size H.
    pub hidden: usize,
    /// Mixture components K.
    pub components: usize,
}

impl Default for MdrnnArch {
    fn default() -> Self {
        MdrnnArch { latent: 8, hidden: 64, components: 5 }
    }
}

impl MdrnnArch {
    pub fn input_size(&self) -> usize {
        self.latent + ACTIONS
    }

    /// Width of the mixture head: K logits + K*D means + K*D scales.
    pub fn head_width(&self) -> usize {
        self.components * (1 + 2 * self.latent)
    }
}

/// LSTM and head weights. Matrices are (in x out); the 4H gate axis is
/// ordered [input | forget | candidate | output]. The head output is laid
/// out [logits | means row-major | raw scales row-major].
#[derive(Debug, Clone, PartialEq)]
pub struct MdrnnParams {
    pub arch: MdrnnArch,
    pub w_ih: Tensor,
    pub w_hh: Tensor,
    pub bias: Tensor,
    pub head_w: Tensor,
    pub head_b: Tensor,
}

impl MdrnnParams {
    pub fn zeros(arch: MdrnnArch) -> Self {
        let gates = 4 * arch.hidden;
        MdrnnParams {
            w_ih: Tensor::zeros(vec![arch.input_size(), gates]),
            w_hh: Tensor::zeros(vec![arch.hidden, gates]),
            bias: Tensor::zeros(vec![gates]),
            head_w: Tensor::zeros(vec![arch.hidden, arch.head_width()]),
            head_b: Tensor::zeros(vec![arch.head_width()]),
            arch,
        }
    }

    pub fn init(rng: &mut Rng, arch: MdrnnArch) -> Self {
        let gates = 4 * arch.hidden;
        let u = |rng: &mut Rng, rows: usize, cols: usize| {
            Tensor::uniform(rng, vec![rows, cols], 1.0 / (rows as f64).sqrt())
        };
        MdrnnParams {
            w_ih: u(rng, arch.input_size(), gates),
            w_hh: u(rng, arch.hidden, gates),
            bias: Tensor::zeros(vec![gates]),
            head_w: u(rng, arch.hidden, arch.head_width()),
            head_b: Tensor::zeros(vec![arch.head_width()]),
            arch,
        }
    }

    pub fn named(&self) -> Vec<(&'static str, &Tensor)> {
        vec![
            ("w_ih", &self.w_ih),
            ("w_hh", &self.w_hh),
            ("bias", &self.bias),
            ("head_w", &self.head_w),
            ("head_b", &self.head_b),
        ]
    }

    pub fn named_mut(&mut self) -> Vec<(&'static str, &mut Tensor)> {
        vec![
            ("w_ih", &mut self.w_ih),
            ("w_hh", &mut self.w_hh),
            ("bias", &mut self.bias),
            ("head_w", &mut self.head_w),
            ("head_b", &mut self.head_b),
        ]
    }
}

/// Recurrent state (h, c).
#[derive(Debug, Clone, PartialEq)]
pub struct MdrnnState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl MdrnnState {
    pub fn zero(hidden: usize) -> Self {
        MdrnnState { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }
}

/// One step's mixture parameters. `mu` and `sigma` are K x D row-major;
/// every sigma is strictly positive (exp of the raw head output).
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    pub logits: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub components: usize,
    pub latent: usize,
}

impl MixtureParams {
    pub fn mu_row(&self, k: usize) -> &[f64] {
        &self.mu[k * self.latent..(k + 1) * self.latent]
    }

    pub fn sigma_row(&self, k: usize) -> &[f64] {
        &self.sigma[k * self.latent..(k + 1) * self.latent]
    }
}

/// Sampling temperatures; both must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub pi_temperature: f64,
    pub sigma_temperature: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { pi_temperature: 1.0, sigma_temperature: 1.0 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pi_temperature > 0.0) || !(self.sigma_temperature > 0.0) {
            return Err(Error::Parameter(format!(
                "temperatures must be > 0, got pi={} sigma={}",
                self.pi_temperature, self.sigma_temperature
            )));
        }
        Ok(())
    }
}

/// One LSTM step: i,f,o = sigmoid gates, g = tanh candidate,
/// c' = f*c + i*g, h' = o * tanh(c').
pub fn lstm_step(x: &[f64], state: &MdrnnState, params: &MdrnnParams) -> MdrnnState {
    let arch = &params.arch;
    let h_size = arch.hidden;
    debug_assert_eq!(x.len(), arch.input_size());

    let mut gates = kernels::vecmat(x, params.w_ih.data(), arch.input_size(), 4 * h_size);
    let rec = kernels::vecmat(&state.h, params.w_hh.data(), h_size, 4 * h_size);
    kernels::add_assign(&mut gates, &rec);
    kernels::add_assign(&mut gates, params.bias.data());

    let mut h = vec![0.0; h_size];
    let mut c = vec![0.0; h_size];
    for j in 0..h_size {
        let i_gate = kernels::sigmoid(gates[j]);
        let f_gate = kernels::sigmoid(gates[h_size + j]);
        let g_cand = gates[2 * h_size + j].tanh();
        let o_gate = kernels::sigmoid(gates[3 * h_size + j]);
        c[j] = f_gate * state.c[j] + i_gate * g_cand;
        h[j] = o_gate * c[j].tanh();
    }
    MdrnnState { h, c }
}

/// Project a hidden state to mixture parameters.
pub fn mdn_head(h: &[f64], params: &MdrnnParams) -> MixtureParams {
    let arch = &params.arch;
    let (k, d) = (arch.components, arch.latent);
    let mut y = kernels::vecmat(h, params.head_w.data(), arch.hidden, arch.head_width());
    kernels::add_assign(&mut y, params.head_b.data());
    let logits = y[..k].to_vec();
    let mu = y[k..k + k * d].to_vec();
    let sigma = y[k + k * d..].iter().map(|raw| raw.exp()).collect();
    MixtureParams { logits, mu, sigma, components: k, latent: d }
}

/// Negative log-density of `target` under the mixture:
/// -logsumexp_k( log softmax(logits)_k + sum_d log N(t_d; mu_kd, sigma_kd^2) ).
pub fn mdn_nll(mix: &MixtureParams, target: &[f64]) -> f64 {
    debug_assert_eq!(target.len(), mix.latent);
    let log_norm = logsumexp(&mix.logits).expect("logits are non-empty");
    let mut terms = Vec::with_capacity(mix.components);
    for k in 0..mix.components {
        let log_pi = mix.logits[k] - log_norm;
        let mut log_density = 0.0;
        for (t, (m, s)) in target.iter().zip(mix.mu_row(k).iter().zip(mix.sigma_row(k))) {
            let s = s.max(SIGMA_FLOOR);
            let zscore = (t - m) / s;
            log_density += -0.5 * zscore * zscore - s.ln() - 0.5 * LN_2PI;
        }
        terms.push(log_pi + log_density);
    }
    -logsumexp(&terms).expect("component terms are non-empty")
}

/// Draw (component index, latent sample). The component comes from the
/// pi-temperature softmax of the logits; each dimension then samples
/// N(mu_kd, (sigma_kd * sqrt(sigma_temperature))^2).
pub fn sample_mixture(
    mix: &MixtureParams,
    cfg: &SamplerConfig,
    rng: &mut Rng,
) -> Result<(usize, Vec<f64>)> {
    cfg.validate()?;
    let weights = softmax(&mix.logits, cfg.pi_temperature)?;
    let draw = rng.next_f64();
    let mut cumulative = 0.0;
    let mut component = weights.len() - 1;
    for (k, w) in weights.iter().enumerate() {
        cumulative += w;
        if draw < cumulative {
            component = k;
            break;
        }
    }
    let z = sample_component(mix, component, cfg.sigma_temperature, rng)?;
    Ok((component, z))
}

/// Gaussian draw from one fixed component (the committed-dream path).
pub fn sample_component(
    mix: &MixtureParams,
    component: usize,
    sigma_temperature: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if component >= mix.components {
        return Err(Error::Parameter(format!(
            "component {component} out of range for K={}",
            mix.components
        )));
    }
    let scale = sigma_temperature.sqrt();
    mix.mu_row(component)
        .iter()
        .zip(mix.sigma_row(component))
        .map(|(m, s)| gaussian_sample(rng, *m, s * scale))
        .collect()
}

// ---- training ----------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MdrnnTrainConfig {
    /// BPTT chunk length.
    pub seq_len: usize,
    pub epochs: usize,
    /// Chunks per Adam update (gradient accumulation).
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for MdrnnTrainConfig {
    fn default() -> Self {
        MdrnnTrainConfig { seq_len: 64, epochs: 20, batch: 16, lr: 1e-3, seed: 0 }
    }
}

/// Build the LSTM + head + NLL graph for one chunk of inputs/targets over
/// parameter leaves inserted in `named()` order. `h0`/`c0` are the carried
/// state. Returns (mean step NLL node, final h node, final c node).
/// Public so gradient checks can drive the exact training graph.
pub fn chunk_nll_graph(
    tape: &mut Tape,
    ids: &[NodeId],
    arch: &MdrnnArch,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    h0: &[f64],
    c0: &[f64],
) -> (NodeId, NodeId, NodeId) {
    let [w_ih, w_hh, bias, head_w, head_b] = ids.try_into().expect("5 parameter tensors");
    let (k, d, h_size) = (arch.components, arch.latent, arch.hidden);
    debug_assert_eq!(inputs.len(), targets.len());

    let mut h = tape.constant_vec(h0.to_vec());
    let mut c = tape.constant_vec(c0.to_vec());
    let mut nll_sum: Option<NodeId> = None;

    for (input, target) in inputs.iter().zip(targets) {
        let x = tape.constant_vec(input.clone());
        let from_x = tape.vecmat(x, w_ih);
        let from_h = tape.vecmat(h, w_hh);
        let pre = tape.add(from_x, from_h);
        let gates = tape.add(pre, bias);

        let i_gate = tape.slice(gates, 0, h_size);
        let i_gate = tape.sigmoid(i_gate);
        let f_gate = tape.slice(gates, h_size, h_size);
        let f_gate = tape.sigmoid(f_gate);
        let g_cand = tape.slice(gates, 2 * h_size, h_size);
        let g_cand = tape.tanh(g_cand);
        let o_gate = tape.slice(gates, 3 * h_size, h_size);
        let o_gate = tape.sigmoid(o_gate);

        let keep = tape.mul(f_gate, c);
        let write = tape.mul(i_gate, g_cand);
        c = tape.add(keep, write);
        let c_squashed = tape.tanh(c);
        h = tape.mul(o_gate, c_squashed);

        // Head + NLL for this step.
        let proj = tape.vecmat(h, head_w);
        let y = tape.add(proj, head_b);
        let logits = tape.slice(y, 0, k);
        let mu = tape.slice(y, k, k * d);
        let mu = tape.reshape(mu, vec![k, d]);
        let raw = tape.slice(y, k + k * d, k * d);
        let raw = tape.reshape(raw, vec![k, d]);
        // Floor the scales inside the loss only: max(exp(raw), floor) is
        // exp(max(raw, ln floor)).
        let raw = tape.clamp_min(raw, SIGMA_FLOOR.ln());

        let target_node = tape.constant_vec(target.clone());
        let target_rows = tape.broadcast_rows(target_node, k);
        let diff = tape.sub(target_rows, mu);
        let neg_raw = tape.scale(raw, -1.0);
        let inv_sigma = tape.exp(neg_raw);
        let zscore = tape.mul(diff, inv_sigma);
        let zsq = tape.mul(zscore, zscore);
        let row_sq = tape.sum_rows(zsq);
        let half_sq = tape.scale(row_sq, -0.5);
        let log_det = tape.sum_rows(raw);
        let quad = tape.sub(half_sq, log_det);
        let log_density = tape.add_scalar(quad, -0.5 * d as f64 * LN_2PI);

        let log_norm = tape.logsumexp(logits);
        let neg_norm = tape.scale(log_norm, -1.0);
        let log_pi = tape.add_broadcast(logits, neg_norm);
        let joint = tape.add(log_pi, log_density);
        let step_lse = tape.logsumexp(joint);
        let step_nll = tape.scale(step_lse, -1.0);

        nll_sum = Some(match nll_sum {
            Some(acc) => tape.add(acc, step_nll),
            None => step_nll,
        });
    }
    let total = nll_sum.expect("chunk has at least one step");
    let mean = tape.scale(total, 1.0 / inputs.len() as f64);
    (mean, h, c)
}

/// LSTM input at step t: latent then one-hot action.
pub fn step_input(latent: &[f64], action: u8) -> Vec<f64> {
    let mut x = Vec::with_capacity(latent.len() + ACTIONS);
    x.extend_from_slice(latent);
    let mut one_hot = [0.0; ACTIONS];
    one_hot[action as usize] = 1.0;
    x.extend_from_slice(&one_hot);
    x
}

/// Train on encoded episodes with truncated BPTT: hidden state carries
/// across chunks inside an episode and resets at boundaries. Gradients
/// accumulate over `batch` chunks per Adam update. Returns the parameters
/// and per-epoch mean step NLL.
pub fn train_mdrnn(
    latents: &LatentDataset,
    arch: MdrnnArch,
    cfg: &MdrnnTrainConfig,
) -> Result<(MdrnnParams, Vec<f64>)> {
    if arch.latent != latents.latent {
        return Err(Error::Parameter(format!(
            "train_mdrnn: dataset latent dim {} does not match architecture {}",
            latents.latent, arch.latent
        )));
    }
    let usable: Vec<usize> = (0..latents.episodes.len())
        .filter(|&i| latents.episodes[i].mus.len() >= 2)
        .collect();
    if usable.is_empty() {
        return Err(Error::Parameter("train_mdrnn: no episode has length >= 2".into()));
    }

    let mut rng = Rng::new(cfg.seed);
    let mut params = MdrnnParams::init(&mut rng, arch.clone());
    let mut adam = Adam::new(cfg.lr);
    let mut curve = Vec::with_capacity(cfg.epochs);

    let mut order = usable;
    for epoch in 0..cfg.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.next_below(i as u64 + 1) as usize;
            order.swap(i, j);
        }

        let mut grad_acc: Vec<Vec<f64>> =
            params.named().iter().map(|(_, t)| vec![0.0; t.len()]).collect();
        let mut chunks_in_batch = 0usize;
        let mut nll_weighted = 0.0;
        let mut steps_total = 0usize;

        for (episode_pos, &ep_idx) in order.iter().enumerate() {
            let episode = &latents.episodes[ep_idx];
            let steps = episode.mus.len() - 1;
            let mut h = vec![0.0; arch.hidden];
            let mut c = vec![0.0; arch.hidden];

            let mut start = 0;
            while start < steps {
                let end = (start + cfg.seq_len).min(steps);
                let inputs: Vec<Vec<f64>> = (start..end)
                    .map(|t| step_input(&episode.mus[t], episode.actions[t]))
                    .collect();
                let targets: Vec<Vec<f64>> =
                    (start..end).map(|t| episode.mus[t + 1].clone()).collect();

                let mut tape = Tape::new();
                let ids: Vec<_> = params.named().iter().map(|(_, t)| tape.param(t)).collect();
                let (loss_id, h_id, c_id) =
                    chunk_nll_graph(&mut tape, &ids, &arch, &inputs, &targets, &h, &c);
                let loss = tape.scalar_value(loss_id);
                if !loss.is_finite() {
                    return Err(Error::Numerical(format!(
                        "train_mdrnn: non-finite loss at epoch {epoch}, episode {episode_pos}, chunk starting {start}"
                    )));
                }
                nll_weighted += loss * inputs.len() as f64;
                steps_total += inputs.len();

                let grads = tape.backward(loss_id)?;
                for (acc, &id) in grad_acc.iter_mut().zip(&ids) {
                    kernels::add_assign(acc, grads.get(id));
                }
                chunks_in_batch += 1;

                // Carry state (values only) across chunk boundaries.
                h = tape.value(h_id).to_vec();
                c = tape.value(c_id).to_vec();

                if chunks_in_batch == cfg.batch {
                    apply_update(&mut params, &mut adam, &mut grad_acc, chunks_in_batch);
                    chunks_in_batch = 0;
                }
                start = end;
            }
        }
        if chunks_in_batch > 0 {
            apply_update(&mut params, &mut adam, &mut grad_acc, chunks_in_batch);
        }
        curve.push(nll_weighted / steps_total as f64);
    }
    Ok((params, curve))
}

fn apply_update(params: &mut MdrnnParams, adam: &mut Adam, grad_acc: &mut [Vec<f64>], chunks: usize) {
    let scale = 1.0 / chunks as f64;
    for acc in grad_acc.iter_mut() {
        for g in acc.iter_mut() {
            *g *= scale;
        }
    }
    let grad_refs: Vec<&[f64]> = grad_acc.iter().map(|g| g.as_slice()).collect();
    let mut tensors = params.named_mut();
    let mut tensor_refs: Vec<&mut Tensor> = tensors.iter_mut().map(|(_, t)| &mut **t).collect();
    adam.step(&mut tensor_refs, &grad_refs);
    for acc in grad_acc.iter_mut() {
        acc.fill(0.0);
    }
}

/// Mean NLL of a trained model over episodes, with state carried within
/// each episode from zero. The held-out evaluation metric.
pub fn evaluate_nll(latents: &LatentDataset, params: &MdrnnParams) -> f64 {
    let mut total = 0.0;
    let mut steps = 0usize;
    for episode in &latents.episodes {
        if episode.mus.len() < 2 {
            continue;
        }
        let mut state = MdrnnState::zero(params.arch.hidden);
        for t in 0..episode.mus.len() - 1 {
            let x = step_input(&episode.mus[t], episode.actions[t]);
            state = lstm_step(&x, &state, params);
            let mix = mdn_head(&state.h, params);
            total += mdn_nll(&mix, &episode.mus[t + 1]);
            steps += 1;
        }
    }
    total / steps as f64
}
