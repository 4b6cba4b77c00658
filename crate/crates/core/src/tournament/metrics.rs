use serde::{Deserialize, Serialize};

use super::{Budgets, StageReport, TournamentError};
use crate::game::Winner;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub p: f64,
    pub a: f64,
    pub e: f64,
    pub g: f64,
    pub r: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { p: 0.40, a: 0.15, e: 0.15, g: 0.15, r: 0.15 }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<(), TournamentError> {
        let w = [self.p, self.a, self.e, self.g, self.r];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(TournamentError::BadWeights(format!("{w:?}")));
        }
        Ok(())
    }
}

impl std::str::FromStr for Weights {
    type Err = TournamentError;

    /// Five comma-separated numbers in P,A,E,G,R order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| TournamentError::BadWeights(s.to_string()))?;
        let [p, a, e, g, r] = parts[..] else { return Err(TournamentError::BadWeights(s.to_string())) };
        let w = Weights { p, a, e, g, r };
        w.validate()?;
        Ok(w)
    }
}

pub fn weighted_score(m: &MetricVector, w: &Weights) -> Result<f64, TournamentError> {
    w.validate()?;
    Ok(w.p * m.p + w.a * m.a + w.e * m.e + w.g * m.g + w.r * m.r)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    points: f64,
    games: usize,
}

impl Tally {
    fn ratio(&self) -> f64 {
        if self.games == 0 {
            0.0
        } else {
            self.points / self.games as f64
        }
    }

    fn add(&mut self, other: Tally) {
        self.points += other.points;
        self.games += other.games;
    }
}

/// Wins plus half of draws over the system's games in `report`, optionally only the
/// first `window` of them in schedule order. A system disqualified on the stage loses
/// every game it would have played.
fn tally(report: &StageReport, system: &str, window: Option<usize>) -> Tally {
    let mut t = Tally::default();
    if report.disqualified.iter().any(|d| d == system) {
        let n = report.entrants.len();
        let rounds = if n >= 2 { (report.games.len() / (n * (n - 1))).max(1) } else { 1 };
        t.games = (2 * n * rounds).max(1).min(window.unwrap_or(usize::MAX));
        return t;
    }
    let games = report.games.iter().filter(|g| g.black_id == system || g.white_id == system);
    for g in games.take(window.unwrap_or(usize::MAX)) {
        let side = if g.black_id == system { Winner::Black } else { Winner::White };
        t.games += 1;
        t.points += match g.outcome.winner {
            w if w == side => 1.0,
            Winner::Tie => 0.5,
            _ => 0.0,
        };
    }
    t
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// P, A, E, G and R of `system` over the given stages.
///
/// P is the points ratio (draws count half) over private stages, A the same over the
/// first `window` games of each private stage, E the average unused share of the
/// analysis and game budgets (0 after any disqualification), G one minus the clamped
/// public-to-private drop, and R the worst per-stage private P.
pub fn compute_metrics(
    system: &str,
    reports: &[StageReport],
    public_ids: &[String],
    private_ids: &[String],
    window: usize,
    budgets: &Budgets,
) -> Result<MetricVector, TournamentError> {
    let find = |id: &String| {
        reports.iter().find(|r| &r.stage_id == id).ok_or_else(|| TournamentError::MissingStage(id.clone()))
    };
    let public: Vec<&StageReport> = public_ids.iter().map(find).collect::<Result<_, _>>()?;
    let private: Vec<&StageReport> = private_ids.iter().map(find).collect::<Result<_, _>>()?;
    if private.is_empty() {
        return Err(TournamentError::MissingStage("no private stage".into()));
    }

    let pool = |stages: &[&StageReport], window: Option<usize>| {
        let mut t = Tally::default();
        for r in stages {
            t.add(tally(r, system, window));
        }
        t.ratio()
    };
    let p = pool(&private, None);
    let a = pool(&private, Some(window));
    let r = private.iter().map(|s| tally(s, system, None).ratio()).fold(f64::INFINITY, f64::min);
    let g = if public.is_empty() { 1.0 } else { 1.0 - clamp01(pool(&public, None) - p) };

    let all: Vec<&StageReport> = public.iter().chain(private.iter()).copied().collect();
    let disqualified = all.iter().any(|s| s.disqualified.iter().any(|d| d == system));
    let e = if disqualified {
        0.0
    } else {
        let analysis: Vec<f64> = all
            .iter()
            .filter_map(|s| s.analysis.iter().find(|a| a.system_id == system))
            .map(|a| a.elapsed_ms as f64)
            .collect();
        let mean_analysis =
            if analysis.is_empty() { 0.0 } else { analysis.iter().sum::<f64>() / analysis.len() as f64 };
        let mut game_ms = Vec::new();
        for s in &all {
            for g in &s.games {
                if g.black_id == system {
                    game_ms.push(g.per_player_time[0] as f64);
                }
                if g.white_id == system {
                    game_ms.push(g.per_player_time[1] as f64);
                }
            }
        }
        let mean_game = if game_ms.is_empty() { 0.0 } else { game_ms.iter().sum::<f64>() / game_ms.len() as f64 };
        let t_analysis = budgets.analysis().as_millis() as f64;
        let t_game = budgets.game().as_millis() as f64;
        clamp01(0.5 * (1.0 - mean_analysis / t_analysis) + 0.5 * (1.0 - mean_game / t_game))
    };
    Ok(MetricVector { p: clamp01(p), a: clamp01(a), e, g, r: clamp01(r) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{EndReason, GameOutcome};
    use crate::stage::Visibility;
    use crate::tournament::{AnalysisRecord, MatchResult};

    fn game(black: &str, white: &str, winner: Winner) -> MatchResult {
        MatchResult {
            stage_id: "s".into(),
            black_id: black.into(),
            white_id: white.into(),
            seed: 0,
            outcome: GameOutcome { winner, black_score: 0, white_score: 0, reason: EndReason::Normal },
            game_length: 0,
            per_player_time: [1000, 3000],
            score_difference: 0,
        }
    }

    fn report(id: &str, games: Vec<MatchResult>) -> StageReport {
        StageReport {
            stage_id: id.into(),
            stage_name: id.into(),
            visibility: Visibility::Private,
            entrants: vec![],
            disqualified: vec![],
            analysis: vec![],
            games,
            leaderboard: vec![],
        }
    }

    #[test]
    fn performance_with_draws() {
        // 9 wins, 1 draw, 2 losses.
        let mut games = Vec::new();
        games.extend((0..9).map(|_| game("x", "o", Winner::Black)));
        games.push(game("x", "o", Winner::Tie));
        games.extend((0..2).map(|_| game("o", "x", Winner::Black)));
        let reports = vec![report("priv", games)];
        let m = compute_metrics("x", &reports, &[], &["priv".into()], 4, &Budgets::default()).unwrap();
        assert!((m.p - 9.5 / 12.0).abs() < 1e-12);
        assert_eq!(m.a, 1.0);
        assert_eq!(m.r, m.p);
        assert_eq!(m.g, 1.0);
        // 1 s of 10 s used: E = 0.5 * 1 + 0.5 * 0.9 as Black in 10 games, 0.7 as White in 2.
        let mean = (10.0 * 1000.0 + 2.0 * 3000.0) / 12.0;
        assert!((m.e - (0.5 + 0.5 * (1.0 - mean / 10_000.0))).abs() < 1e-12);
    }

    #[test]
    fn generalization_and_disqualification() {
        let public: Vec<_> =
            (0..10).map(|i| game("x", "o", if i < 8 { Winner::Black } else { Winner::White })).collect();
        let private: Vec<_> =
            (0..10).map(|i| game("x", "o", if i < 7 { Winner::Black } else { Winner::White })).collect();
        let mut reports = vec![report("pub", public), report("priv", private)];
        let m = compute_metrics("x", &reports, &["pub".into()], &["priv".into()], 4, &Budgets::default()).unwrap();
        assert!((m.g - 0.9).abs() < 1e-12);
        reports[1].disqualified.push("x".into());
        reports[1].analysis.push(AnalysisRecord {
            system_id: "x".into(),
            elapsed_ms: 60_000,
            status: "timeout".into(),
        });
        let m = compute_metrics("x", &reports, &["pub".into()], &["priv".into()], 4, &Budgets::default()).unwrap();
        assert_eq!(m.e, 0.0);
        assert!(matches!(
            compute_metrics("x", &reports, &["nope".into()], &["priv".into()], 4, &Budgets::default()),
            Err(TournamentError::MissingStage(_))
        ));
    }

    #[test]
    fn weighting() {
        let m = MetricVector { p: 0.8, a: 0.5, e: 0.9, g: 0.9, r: 0.6 };
        assert!((weighted_score(&m, &Weights::default()).unwrap() - 0.755).abs() < 1e-12);
        let ones = MetricVector { p: 1.0, a: 1.0, e: 1.0, g: 1.0, r: 1.0 };
        assert!((weighted_score(&ones, &Weights::default()).unwrap() - 1.0).abs() < 1e-12);
        let only_p: Weights = "1,0,0,0,0".parse().unwrap();
        assert_eq!(weighted_score(&m, &only_p).unwrap(), 0.8);
        assert!("0.5,0.5,0.5,0,0".parse::<Weights>().is_err());
        assert!("1,0,0".parse::<Weights>().is_err());
        assert!(weighted_score(&m, &Weights { p: -1.0, a: 2.0, e: 0.0, g: 0.0, r: 0.0 }).is_err());
    }
}
