//! Per-iteration traces of the outer drivers and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

/// Which loop of a two-phase driver a record belongs to.
///
/// Single-loop drivers tag every record [`Phase::First`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    First,
    Second,
}

/// One outer iteration worth of diagnostics.
#[derive(Debug, Clone)]
pub struct IterRecord {
    /// 1-based iteration index within its phase.
    pub k: usize,
    pub phase: Phase,
    /// Fidelity parameter used this iteration.
    pub eta: f64,
    /// Inner-solve output norm ‖r^k‖.
    pub r_norm: f64,
    /// Exact-residual norm ‖r_ex^k‖.
    pub rex_norm: f64,
    pub u_minus_f: f64,
    /// ‖u^k - g‖, present when a clean image was supplied.
    pub u_minus_g: Option<f64>,
    /// PSNR against the clean image, when supplied.
    pub psnr: Option<f64>,
    /// Bregman distance from the zero residual (diagnostic).
    pub bregman: Option<f64>,
    /// Wall time of this iteration.
    pub seconds: f64,
}

/// Full trace of one driver run.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub records: Vec<IterRecord>,
}

impl SolveReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of one phase, in order.
    pub fn phase(&self, phase: Phase) -> impl Iterator<Item = &IterRecord> {
        self.records.iter().filter(move |r| r.phase == phase)
    }

    /// 1-based iteration index (within `phase`) minimizing ‖u - g‖.
    pub fn argmin_u_minus_g(&self, phase: Phase) -> Option<usize> {
        self.phase(phase)
            .filter_map(|r| r.u_minus_g.map(|d| (r.k, d)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    }

    /// One row per outer iteration. Timing values are emitted only when
    /// `include_timings` is set, keeping default output reproducible
    /// byte-for-byte; columns without data stay empty.
    pub fn to_csv(&self, include_timings: bool) -> String {
        let mut out = String::from("k,eta,r_norm,rex_norm,u_minus_f,u_minus_g,psnr,bregman,seconds\n");
        for r in &self.records {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.k,
                r.eta,
                r.r_norm,
                r.rex_norm,
                r.u_minus_f,
                opt(r.u_minus_g),
                opt(r.psnr),
                opt(r.bregman),
                if include_timings {
                    r.seconds.to_string()
                } else {
                    String::new()
                },
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, include_timings: bool) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv(include_timings))
    }
}
