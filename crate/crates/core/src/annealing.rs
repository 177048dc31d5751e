//! Simulated-annealing trainer with Metropolis acceptance.

use crate::error::{Error, Result};
use crate::network::{rms_error, Network, TrainingSet, WeightBounds};
use crate::prng::RandomSource;

/// Geometric cooling schedule.
///
/// The default is the deliberately short "stop early" preset used by the
/// experiments: it leaves the network in a local minimum that refinement can
/// then improve on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule {
    pub t_initial: f64,
    pub cooling_factor: f64,
    pub steps_per_temperature: usize,
    pub t_final: f64,
    /// Largest single-move change, as a fraction of the bounds' half-width.
    pub move_step: f64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self::early_stop()
    }
}

impl AnnealingSchedule {
    /// Fast, non-optimal cooling.
    pub fn early_stop() -> Self {
        AnnealingSchedule {
            t_initial: 0.3,
            cooling_factor: 0.6,
            steps_per_temperature: 20,
            t_final: 1e-3,
            move_step: 0.4,
        }
    }

    /// Slow cooling that usually reaches a much lower training energy.
    pub fn thorough() -> Self {
        AnnealingSchedule {
            t_initial: 0.1,
            cooling_factor: 0.95,
            steps_per_temperature: 200,
            t_final: 1e-5,
            move_step: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_initial.is_finite() && self.t_initial > 0.0) {
            return Err(Error::invalid(format!(
                "t_initial must be positive and finite, got {}",
                self.t_initial
            )));
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return Err(Error::invalid(format!(
                "cooling_factor must lie in (0, 1), got {}",
                self.cooling_factor
            )));
        }
        if !(self.t_final > 0.0 && self.t_final < self.t_initial) {
            return Err(Error::invalid(format!(
                "t_final must satisfy 0 < t_final < t_initial, got {}",
                self.t_final
            )));
        }
        if !(self.move_step > 0.0 && self.move_step <= 1.0) {
            return Err(Error::invalid(format!(
                "move_step must lie in (0, 1], got {}",
                self.move_step
            )));
        }
        Ok(())
    }

    /// Temperatures visited, from `t_initial` down to the last one `>= t_final`.
    pub fn temperatures(&self) -> impl Iterator<Item = f64> {
        let (alpha, t_final) = (self.cooling_factor, self.t_final);
        std::iter::successors(Some(self.t_initial), move |t| Some(t * alpha))
            .take_while(move |&t| t >= t_final)
    }
}

/// State of the run at the end of one temperature level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub temperature: f64,
    pub energy: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    pub best_network: Network,
    pub best_energy: f64,
    pub energy_history: Vec<EnergyRecord>,
}

/// Metropolis test: draws `R = next_unit()` and accepts when
/// `R < exp(-delta_e / temperature)`.
///
/// Always consumes exactly one draw, even for downhill moves.
pub fn accept_move<R: RandomSource + ?Sized>(
    delta_e: f64,
    temperature: f64,
    rng: &mut R,
) -> Result<bool> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    if !delta_e.is_finite() {
        return Err(Error::invalid(format!(
            "energy difference {delta_e} is not finite"
        )));
    }
    let r = rng.next_unit();
    Ok(r < (-delta_e / temperature).exp())
}

/// Perturbs one uniformly chosen parameter by up to `step` half-widths and
/// clamps it into `bounds`.
///
/// Draws: one `next_unit` for the index, then one `next_symmetric` for the change.
pub fn propose_move<R: RandomSource + ?Sized>(
    net: &Network,
    bounds: &WeightBounds,
    step: f64,
    rng: &mut R,
) -> Result<Network> {
    if !(step.is_finite() && step >= 0.0) {
        return Err(Error::invalid(format!(
            "move step must be finite and >= 0, got {step}"
        )));
    }
    let n = net.param_count();
    let idx = ((rng.next_unit() * n as f64) as usize).min(n - 1);
    let delta = rng.next_symmetric() * step * bounds.half_width();

    let mut candidate = net.clone();
    let p = candidate.param_mut(idx).expect("index below param_count");
    *p = bounds.clamp(*p + delta);
    Ok(candidate)
}

/// Minimizes the training-set RMS error by simulated annealing, returning the
/// best network seen.
pub fn anneal<R: RandomSource + ?Sized>(
    net: &Network,
    data: &TrainingSet,
    schedule: &AnnealingSchedule,
    bounds: &WeightBounds,
    rng: &mut R,
) -> Result<AnnealResult> {
    schedule.validate()?;
    if !net.is_finite() {
        return Err(Error::invalid("initial network has non-finite parameters"));
    }

    let mut current = net.clone();
    let mut energy = rms_error(&current, data)?;
    let mut best = current.clone();
    let mut best_energy = energy;
    let mut history = Vec::new();

    for temperature in schedule.temperatures() {
        for _ in 0..schedule.steps_per_temperature {
            let candidate = propose_move(&current, bounds, schedule.move_step, rng)?;
            let candidate_energy = rms_error(&candidate, data)?;
            if accept_move(candidate_energy - energy, temperature, rng)? {
                current = candidate;
                energy = candidate_energy;
                if energy < best_energy {
                    best = current.clone();
                    best_energy = energy;
                }
            }
        }
        history.push(EnergyRecord {
            temperature,
            energy,
            best_energy,
        });
    }

    Ok(AnnealResult {
        best_network: best,
        best_energy,
        energy_history: history,
    })
}
