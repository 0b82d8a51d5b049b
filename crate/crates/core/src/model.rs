//! The overhead-law cost model.
//!
//! A parallel loop over `N > 1` workers is modelled as perfectly divisible
//! work `T1` plus one constant overhead `T0` paid per parallel invocation:
//! `T_N = T1 / N + T0`. Everything the adaptive policy decides (how many
//! cores, how large a chunk) is derived from that single relation and a
//! target parallel efficiency.
//!
//! All functions here are pure. Times are `f64` seconds; callers convert
//! from measured [`std::time::Duration`]s at the boundary.

use thiserror::Error;

/// Default efficiency target: 95 %.
pub const DEFAULT_EFFICIENCY: f64 = 0.95;

/// Default number of chunks handed to each participating core.
pub const DEFAULT_CHUNKS_PER_CORE: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("overhead law invalid at N={0}: it only applies to N >= 2")]
    SingleWorker(usize),
    #[error("speedup undefined for zero sequential work")]
    ZeroWork,
    #[error("parallel fraction {0} outside (0, 1)")]
    Fraction(f64),
    #[error("invalid model parameter: {0}")]
    Param(&'static str),
}

/// Inputs to the model: sequential loop time, per-invocation overhead,
/// the efficiency we are willing to accept and how many chunks each core
/// should receive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    t1: f64,
    t0: f64,
    efficiency_target: f64,
    chunks_per_core: usize,
}

impl ModelParams {
    pub fn new(
        t1: f64,
        t0: f64,
        efficiency_target: f64,
        chunks_per_core: usize,
    ) -> Result<Self, ModelError> {
        if !t1.is_finite() || t1 < 0.0 {
            return Err(ModelError::Param("t1 must be finite and >= 0"));
        }
        if !t0.is_finite() || t0 <= 0.0 {
            return Err(ModelError::Param("t0 must be finite and > 0"));
        }
        if !(efficiency_target > 0.0 && efficiency_target < 1.0) {
            return Err(ModelError::Param("efficiency target must lie in (0, 1)"));
        }
        if chunks_per_core == 0 {
            return Err(ModelError::Param("chunks per core must be >= 1"));
        }
        Ok(ModelParams {
            t1,
            t0,
            efficiency_target,
            chunks_per_core,
        })
    }

    /// Parameters with E = 0.95 and C = 8.
    pub fn with_defaults(t1: f64, t0: f64) -> Result<Self, ModelError> {
        Self::new(t1, t0, DEFAULT_EFFICIENCY, DEFAULT_CHUNKS_PER_CORE)
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn efficiency_target(&self) -> f64 {
        self.efficiency_target
    }

    pub fn chunks_per_core(&self) -> usize {
        self.chunks_per_core
    }

    fn nonzero_work(&self) -> Result<(), ModelError> {
        if self.t1 > 0.0 {
            Ok(())
        } else {
            Err(ModelError::ZeroWork)
        }
    }
}

/// The unclamped core count the model asks for, plus whether running in
/// parallel is worthwhile at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreRecommendation {
    /// Real-valued solution of the efficiency equation for N.
    pub n_real: f64,
    /// `floor(n_real)`, at least 1; forced to 1 when `sequential`.
    pub n_effective: usize,
    /// Set when fewer than two cores' worth of work exists.
    pub sequential: bool,
}

fn require_parallel(n: usize) -> Result<(), ModelError> {
    if n < 2 {
        Err(ModelError::SingleWorker(n))
    } else {
        Ok(())
    }
}

/// `T_N = T1 / n + T0`.
pub fn predicted_parallel_time(params: &ModelParams, n: usize) -> Result<f64, ModelError> {
    require_parallel(n)?;
    Ok(params.t1 / n as f64 + params.t0)
}

/// `S = T1 / (T1 / n + T0)`.
pub fn speedup(params: &ModelParams, n: usize) -> Result<f64, ModelError> {
    require_parallel(n)?;
    params.nonzero_work()?;
    Ok(params.t1 / (params.t1 / n as f64 + params.t0))
}

/// Amdahl-style form of the overhead law with parallel fraction
/// `p = T1 / (T0 + T1)`.
pub fn speedup_from_fraction(p: f64, n: usize) -> Result<f64, ModelError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ModelError::Fraction(p));
    }
    require_parallel(n)?;
    Ok(p / (1.0 - p + p / n as f64))
}

/// `E = S / n = T1 / (n T_N)`.
pub fn efficiency(params: &ModelParams, n: usize) -> Result<f64, ModelError> {
    Ok(speedup(params, n)? / n as f64)
}

/// Efficiency evaluated at a real-valued worker count. Used to check that
/// the core-count solution reproduces the target exactly before rounding.
pub fn efficiency_at(params: &ModelParams, n: f64) -> Result<f64, ModelError> {
    params.nonzero_work()?;
    let t_n = params.t1 / n + params.t0;
    Ok(params.t1 / (n * t_n))
}

/// Solve `E = T1 / (n T_N)` for n: `n = (1 - E) / E * T1 / T0`.
pub fn optimal_cores(params: &ModelParams) -> CoreRecommendation {
    let e = params.efficiency_target;
    let n_real = (1.0 - e) / e * (params.t1 / params.t0);
    let sequential = n_real < 2.0;
    let n_effective = if sequential {
        1
    } else {
        // saturating float->int cast; huge n_real is clamped by the scheduler
        n_real.floor() as usize
    };
    CoreRecommendation {
        n_real,
        n_effective,
        sequential,
    }
}

/// Work each core must receive for the efficiency target to hold:
/// `T_opt = E / (1 - E) * T0` (19 T0 at E = 0.95).
pub fn work_per_core_target(params: &ModelParams) -> f64 {
    let e = params.efficiency_target;
    e / (1.0 - e) * params.t0
}

/// `N_C = T1 / T_opt`. Algebraically the same quantity as
/// [`optimal_cores`]'s `n_real`.
pub fn cores_from_work(params: &ModelParams) -> f64 {
    params.t1 / work_per_core_target(params)
}

/// Minimum work per chunk, `T_m = T1 / (n_c * C)`.
pub fn min_chunk_time(params: &ModelParams, n_c: usize) -> f64 {
    let n_c = n_c.max(1);
    params.t1 / (n_c * params.chunks_per_core) as f64
}

/// Elements per chunk, `N_CH = ceil(N_E / (N_C * C))`, never below 1.
pub fn chunk_size(n_elements: usize, n_c: usize, chunks_per_core: usize) -> usize {
    let chunks = n_c.max(1).saturating_mul(chunks_per_core.max(1));
    n_elements.div_ceil(chunks).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const US: f64 = 1e-6;

    fn p(t1: f64, t0: f64) -> ModelParams {
        ModelParams::with_defaults(t1, t0).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(ModelParams::new(1.0, 0.0, 0.95, 8).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.95, 8).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 8).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 8).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.95, 0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 0.95, 8).is_err());
        let d = ModelParams::with_defaults(0.0, 1.0).unwrap();
        assert_eq!(d.efficiency_target(), 0.95);
        assert_eq!(d.chunks_per_core(), 8);
    }

    #[test]
    fn parallel_time() {
        assert_eq!(predicted_parallel_time(&p(10.0, 1.0), 2).unwrap(), 6.0);
        assert_eq!(predicted_parallel_time(&p(0.0, 1.0), 4).unwrap(), 1.0);
        assert!(close(
            predicted_parallel_time(&p(190.0 * US, US), 10).unwrap(),
            20.0 * US,
            1e-12
        ));
        assert_eq!(
            predicted_parallel_time(&p(10.0, 1.0), 1),
            Err(ModelError::SingleWorker(1))
        );
    }

    #[test]
    fn speedup_values() {
        assert!(close(
            speedup(&p(190.0 * US, US), 2).unwrap(),
            190.0 / 96.0,
            1e-12
        ));
        assert!(close(
            speedup(&p(10.0, 10.0), 2).unwrap(),
            10.0 / 15.0,
            1e-12
        ));
        // 19 T0 of total work split over two cores: 19 / (9.5 + 1).
        assert!(close(
            speedup(&p(19.0, 1.0), 2).unwrap(),
            19.0 / 10.5,
            1e-12
        ));
        // 19 T0 of work on each of two cores is the 95 % point.
        assert!(close(speedup(&p(38.0, 1.0), 2).unwrap(), 1.9, 1e-12));
        assert_eq!(speedup(&p(0.0, 1.0), 2), Err(ModelError::ZeroWork));
        assert_eq!(speedup(&p(1.0, 1.0), 0), Err(ModelError::SingleWorker(0)));
    }

    #[test]
    fn fraction_form() {
        assert!(close(speedup_from_fraction(0.95, 19).unwrap(), 9.5, 1e-12));
        assert!(close(
            speedup_from_fraction(0.5, 2).unwrap(),
            2.0 / 3.0,
            1e-12
        ));
        let frac = 10.0 / 11.0;
        assert!(close(
            speedup_from_fraction(frac, 2).unwrap(),
            speedup(&p(10.0, 1.0), 2).unwrap(),
            1e-12
        ));
        assert!(matches!(
            speedup_from_fraction(1.0, 2),
            Err(ModelError::Fraction(_))
        ));
        assert!(matches!(
            speedup_from_fraction(0.0, 2),
            Err(ModelError::Fraction(_))
        ));
    }

    #[test]
    fn efficiency_values() {
        assert!(close(
            efficiency(&p(19.0, 1.0), 2).unwrap(),
            19.0 / 21.0,
            1e-12
        ));
        assert!(close(efficiency(&p(38.0, 1.0), 2).unwrap(), 0.95, 1e-12));
        assert!(close(
            efficiency(&p(10.0, 1.0), 2).unwrap(),
            10.0 / 12.0,
            1e-12
        ));
        assert!(efficiency(&p(1e12, 1.0), 4).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn core_recommendation() {
        let r = optimal_cores(&p(190.0 * US, US));
        assert!(close(r.n_real, 10.0, 1e-12));
        assert_eq!(r.n_effective, 10);
        assert!(!r.sequential);

        let r = optimal_cores(&p(19.0 * US, US));
        assert!(close(r.n_real, 1.0, 1e-12));
        assert!(r.sequential);
        assert_eq!(r.n_effective, 1);

        let half = ModelParams::new(10.0, 1.0, 0.5, 8).unwrap();
        assert!(close(optimal_cores(&half).n_real, 10.0, 1e-12));

        let zero = optimal_cores(&p(0.0, 1.0));
        assert!(zero.sequential && zero.n_effective == 1);
    }

    #[test]
    fn work_targets() {
        assert!(close(work_per_core_target(&p(0.0, US)), 19.0 * US, 1e-12));
        let e90 = ModelParams::new(0.0, US, 0.9, 8).unwrap();
        assert!(close(work_per_core_target(&e90), 9.0 * US, 1e-12));
        assert!(close(work_per_core_target(&p(0.0, 0.5e-3)), 9.5e-3, 1e-12));

        assert!(close(cores_from_work(&p(190.0 * US, US)), 10.0, 1e-12));
        assert!(close(cores_from_work(&p(19.0 * US, US)), 1.0, 1e-12));
    }

    #[test]
    fn chunk_time_and_size() {
        assert!(close(
            min_chunk_time(&p(190.0 * US, US), 10),
            2.375 * US,
            1e-12
        ));
        assert!(close(min_chunk_time(&p(80.0, 1.0), 1), 10.0, 1e-12));
        let one = ModelParams::new(12.0, 1.0, 0.95, 1).unwrap();
        assert!(close(min_chunk_time(&one, 3), 4.0, 1e-12));

        assert_eq!(chunk_size(1_000_000, 10, 8), 12_500);
        assert_eq!(chunk_size(100, 10, 8), 2);
        assert_eq!(chunk_size(1, 40, 8), 1);
    }
}
