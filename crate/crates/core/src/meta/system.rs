use std::panic::{self, AssertUnwindSafe};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use super::{analyze_stage, AnalysisBudget, AnalysisError};
use crate::clock::{Clock, TimingMode};
use crate::env::{ApiUsage, EnvHandle};
use crate::stage::{SanitizedStageConfig, StageConfig};
use crate::strategy::{RandomMover, Strategy};

/// Output of a successful analysis.
pub struct AnalysisArtifact {
    pub strategy: Arc<dyn Strategy>,
    /// Serialized form of the strategy, if the system has one.
    pub document: Option<String>,
    pub transcript: Vec<String>,
}

impl std::fmt::Debug for AnalysisArtifact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalysisArtifact")
            .field("strategy", &self.strategy.id())
            .field("transcript", &self.transcript)
            .finish()
    }
}

/// A system that turns a stage it has never seen into a strategy, using only the
/// sanitized stage view and the environment API.
pub trait IntelligentSystem: Send + Sync {
    fn id(&self) -> &str;

    fn display_name(&self) -> &str;

    fn analyze(
        &self,
        view: &SanitizedStageConfig,
        env: &EnvHandle,
        budget: &AnalysisBudget,
        seed: u64,
    ) -> Result<AnalysisArtifact, AnalysisError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MetaLearner;

impl IntelligentSystem for MetaLearner {
    fn id(&self) -> &str {
        "meta-learner"
    }

    fn display_name(&self) -> &str {
        "MetaLearner"
    }

    fn analyze(
        &self,
        view: &SanitizedStageConfig,
        env: &EnvHandle,
        budget: &AnalysisBudget,
        seed: u64,
    ) -> Result<AnalysisArtifact, AnalysisError> {
        let (strategy, transcript) = analyze_stage(view, env, budget, seed)?;
        Ok(AnalysisArtifact {
            document: Some(strategy.to_document()),
            transcript: transcript.lines(),
            strategy: Arc::new(strategy),
        })
    }
}

/// Test double that holds on to its analysis for `extra` beyond the budget before
/// answering, so every run of it must be cut off by the watchdog.
#[derive(Debug, Clone, Copy)]
pub struct StallingSystem {
    pub extra: Duration,
}

impl IntelligentSystem for StallingSystem {
    fn id(&self) -> &str {
        "stalling"
    }

    fn display_name(&self) -> &str {
        "Stalling"
    }

    fn analyze(
        &self,
        view: &SanitizedStageConfig,
        env: &EnvHandle,
        budget: &AnalysisBudget,
        _seed: u64,
    ) -> Result<AnalysisArtifact, AnalysisError> {
        let until = Instant::now() + budget.total + self.extra;
        while Instant::now() < until {
            let _ = env.get_valid_moves(&view.initial_board, view.start_player);
            thread::sleep(Duration::from_millis(2));
        }
        Ok(AnalysisArtifact { strategy: Arc::new(RandomMover), document: None, transcript: Vec::new() })
    }
}

#[derive(Debug)]
pub struct AnalysisRun {
    pub artifact: AnalysisArtifact,
    /// Analysis time on the run's clock (virtual in deterministic mode).
    pub elapsed: Duration,
    pub wall: Duration,
    pub usage: ApiUsage,
}

/// Runs `system` on a fresh environment for `stage` under a watchdog.
///
/// The analysis runs on its own thread. The caller gets control back no later than
/// `budget.total` of wall time; a system still running then is abandoned (its
/// environment is cut off so API-bound loops unwind) and reported as a timeout. In
/// deterministic mode the run also times out when the virtual clock passes the total.
pub fn run_analysis(
    system: Arc<dyn IntelligentSystem>,
    stage: &StageConfig,
    budget: &AnalysisBudget,
    mode: TimingMode,
    seed: u64,
) -> Result<AnalysisRun, AnalysisError> {
    budget.validate()?;
    let env = Arc::new(EnvHandle::new(stage.clone(), Arc::new(Clock::new(mode))));
    env.set_cutoff(Some(budget.total));
    let view = env.stage_view();
    let (tx, rx) = mpsc::sync_channel(1);
    let started = Instant::now();
    {
        let env = Arc::clone(&env);
        let budget = *budget;
        thread::Builder::new()
            .name(format!("analysis-{}", system.id()))
            .spawn(move || {
                let result = panic::catch_unwind(AssertUnwindSafe(|| system.analyze(&view, &env, &budget, seed)))
                    .unwrap_or_else(|_| Err(AnalysisError::Failed("analysis panicked".into())));
                let _ = tx.send(result);
            })
            .map_err(|e| AnalysisError::Failed(e.to_string()))?;
    }
    let remaining = budget.total.saturating_sub(started.elapsed());
    let artifact = match rx.recv_timeout(remaining) {
        Ok(result) => result?,
        Err(_) => {
            env.set_cutoff(Some(Duration::ZERO));
            return Err(AnalysisError::Timeout(budget.total));
        }
    };
    let wall = started.elapsed();
    let elapsed = match mode {
        TimingMode::Wall => wall,
        TimingMode::Deterministic => env.clock().now(),
    };
    if elapsed > budget.total || wall > budget.total {
        return Err(AnalysisError::Timeout(budget.total));
    }
    Ok(AnalysisRun { artifact, elapsed, wall, usage: env.usage() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stage::{find_builtin, STANDARD_ID};

    #[test]
    fn stalling_system_times_out_on_time() {
        let stage = find_builtin(STANDARD_ID).unwrap().stage;
        let budget = AnalysisBudget::with_total(Duration::from_millis(300));
        let start = Instant::now();
        let r = run_analysis(
            Arc::new(StallingSystem { extra: Duration::from_millis(200) }),
            &stage,
            &budget,
            TimingMode::Wall,
            0,
        );
        assert_eq!(r.unwrap_err(), AnalysisError::Timeout(budget.total));
        assert!(start.elapsed() < Duration::from_millis(400));
    }

    #[test]
    fn meta_learner_produces_strategy() {
        let stage = find_builtin(STANDARD_ID).unwrap().stage;
        let budget = AnalysisBudget::with_total(Duration::from_millis(600));
        let run = run_analysis(Arc::new(MetaLearner), &stage, &budget, TimingMode::Wall, 0).unwrap();
        assert!(run.wall <= budget.total);
        assert_eq!(run.artifact.strategy.id(), "meta-learner");
        assert!(run.artifact.document.is_some());
        assert!(run.usage.total_calls() > 0);
    }

    struct Panicky;

    impl IntelligentSystem for Panicky {
        fn id(&self) -> &str {
            "panicky"
        }

        fn display_name(&self) -> &str {
            "Panicky"
        }

        fn analyze(
            &self,
            _: &SanitizedStageConfig,
            _: &EnvHandle,
            _: &AnalysisBudget,
            _: u64,
        ) -> Result<AnalysisArtifact, AnalysisError> {
            panic!("boom")
        }
    }

    #[test]
    fn panics_become_failures() {
        let stage = find_builtin(STANDARD_ID).unwrap().stage;
        let budget = AnalysisBudget::with_total(Duration::from_millis(300));
        let r = run_analysis(Arc::new(Panicky), &stage, &budget, TimingMode::Wall, 0);
        assert!(matches!(r, Err(AnalysisError::Failed(_))));
    }
}
