//! Serializable commands behind the command line. A [`Command`] holds all of
//! its inputs, so its JSON form replays the same run.

use crate::apportionment::{compare_all, Method};
use crate::axioms::{check_quota, regenerate_axiom_table_for, AxiomTable, CorpusConfig};
use crate::bias::{run_bias_experiment, BiasConfig, BiasReport};
use crate::error::{Error, Result};
use crate::io::{parse_profile, render_trace, Format, ProblemInput};
use crate::modified::{run_modified, ModifiedTrace};
use crate::original::{cost_stabilization_time, detect_cycle, run_original, Cycle};
use crate::profile::Profile;
use crate::quota::QuotaReport;
use crate::scalar::{Rational, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Modified,
}

/// Where a profile comes from. Standard input is captured as `Inline` so
/// that the command stays replayable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Input {
    Path(PathBuf),
    Inline(String),
}

impl Input {
    pub fn read(&self) -> Result<Vec<u8>> {
        match self {
            Input::Path(p) => {
                std::fs::read(p).map_err(|e| Error::Validation(format!("cannot read {}: {e}", p.display())))
            }
            Input::Inline(s) => Ok(s.clone().into_bytes()),
        }
    }

    pub fn profile(&self) -> Result<Profile> {
        parse_profile(&self.read()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Simulate {
        method: Variant,
        profile: Input,
        horizon: u64,
        /// Append the variable quota audit.
        #[serde(default)]
        audit: bool,
    },
    Apportion {
        problem: ProblemInput,
        /// Overrides the method named in the problem.
        method: Option<Method>,
    },
    Compare {
        problem: ProblemInput,
    },
    AxiomCheck {
        methods: Vec<Method>,
        corpus: CorpusConfig,
    },
    Bias(BiasConfig),
    Stabilize {
        n: u64,
        m: u64,
    },
    Cycle {
        profile: Input,
        cap: u64,
    },
}

impl Command {
    /// Runs the command and renders its result.
    pub fn execute(&self, format: Format) -> Result<String> {
        match self {
            Command::Simulate {
                method,
                profile,
                horizon,
                audit,
            } => {
                let profile = profile.profile()?;
                let (mut out, report) = match method {
                    Variant::Original => {
                        let trace = run_original(&profile, *horizon)?;
                        (render_trace(&trace, format), trace.audit())
                    }
                    Variant::Modified => {
                        let trace = run_modified::<Rational>(&profile, *horizon)?;
                        verify_modified(&trace)?;
                        (render_trace(&trace, format), trace.audit())
                    }
                };
                if *audit {
                    out.push_str(&render_audit(&report, &profile, format));
                }
                Ok(out)
            }
            Command::Apportion { problem, method } => {
                let method = method
                    .or(problem.method)
                    .ok_or_else(|| Error::Validation("no apportionment method given".into()))?;
                let p = problem.problem()?;
                let solution = method.apportion(&p);
                let check = check_quota(&solution, &p)?;
                Ok(match format {
                    Format::Text => format!(
                        "{}: {solution}\nupper quota: {}  lower quota: {}\n",
                        method.title(),
                        ok(check.upper_ok),
                        ok(check.lower_ok)
                    ),
                    Format::Csv => {
                        let mut out = "party,seats,quota\n".to_string();
                        for (i, a) in solution.seats().iter().enumerate() {
                            let _ = writeln!(out, "{},{a},{}", i + 1, p.quota(i));
                        }
                        out
                    }
                    Format::Json => pretty(&json!({
                        "method": method,
                        "seats": solution.seats(),
                        "quotas": (0..p.parties()).map(|i| p.quota(i).to_string()).collect::<Vec<_>>(),
                        "quota_check": check,
                    })),
                })
            }
            Command::Compare { problem } => {
                let p = problem.problem()?;
                let all = compare_all(&p);
                Ok(match format {
                    Format::Text => {
                        let width = all.iter().map(|(m, _)| m.title().chars().count()).max().unwrap_or(0);
                        let mut out = String::new();
                        for (m, s) in &all {
                            let pad = width - m.title().chars().count();
                            let _ = writeln!(out, "{}{}  {s}", m.title(), " ".repeat(pad));
                        }
                        out
                    }
                    Format::Csv => {
                        let mut out = String::from("method");
                        for i in 1..=p.parties() {
                            let _ = write!(out, ",party_{i}");
                        }
                        out.push('\n');
                        for (m, s) in &all {
                            let cells: Vec<String> = s.seats().iter().map(u64::to_string).collect();
                            let _ = writeln!(out, "{},{}", m.name(), cells.join(","));
                        }
                        out
                    }
                    Format::Json => pretty(
                        &all.iter()
                            .map(|(m, s)| json!({"method": m, "seats": s.seats()}))
                            .collect::<Vec<_>>(),
                    ),
                })
            }
            Command::AxiomCheck { methods, corpus } => {
                let table = regenerate_axiom_table_for(corpus, methods)?;
                Ok(render_axiom_table(&table, format))
            }
            Command::Bias(config) => {
                let report = run_bias_experiment(config)?;
                Ok(render_bias(&report, format))
            }
            Command::Stabilize { n, m } => {
                if *n == 0 || *m == 0 {
                    return Err(Error::Validation("n and m must be positive".into()));
                }
                let t0 = cost_stabilization_time(*n, *m);
                Ok(match format {
                    Format::Text => format!("t0 = {t0}\n"),
                    Format::Csv => format!("n,m,t0\n{n},{m},{t0}\n"),
                    Format::Json => pretty(&json!({"n": n, "m": m, "t0": t0})),
                })
            }
            Command::Cycle { profile, cap } => {
                let profile = profile.profile()?;
                let cycle = detect_cycle(&profile, *cap)?;
                Ok(render_cycle(&cycle, &profile, format))
            }
        }
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "violated"
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("serializable value"))
}

/// Scores sum to one and `s_j > p_j - 1` in every round.
fn verify_modified<T: Scalar>(trace: &ModifiedTrace<T>) -> Result<()> {
    for r in &trace.records {
        let sum = r.scores.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !sum.nearly_eq(&T::one()) {
            return Err(Error::Invariant(format!("scores of round {} sum to {sum}", r.t)));
        }
        for (s, p) in r.scores.iter().zip(&r.shares) {
            if s.clone() - p.clone() <= -T::one() {
                return Err(Error::Invariant(format!(
                    "score {s} below share minus one in round {}",
                    r.t
                )));
            }
        }
    }
    Ok(())
}

fn render_audit(report: &QuotaReport, profile: &Profile, format: Format) -> String {
    let name = |c: crate::profile::CandidateId| profile.label(c).to_string();
    match format {
        Format::Text => {
            let mut out = format!(
                "upper quota: {}  lower quota: {}  largest lower deficit: {}\n",
                ok(report.upper_ok()),
                ok(report.lower_ok()),
                report.max_lower_deficit
            );
            for v in &report.lower_violations {
                let _ = writeln!(
                    out,
                    "t = {}: {} is {} below lower quota",
                    v.t,
                    name(v.candidate),
                    v.amount
                );
            }
            for v in &report.upper_violations {
                let _ = writeln!(
                    out,
                    "t = {}: {} is {} above upper quota",
                    v.t,
                    name(v.candidate),
                    v.amount
                );
            }
            out
        }
        Format::Csv => {
            let mut out = "t,candidate,kind,amount\n".to_string();
            for (kind, list) in [("lower", &report.lower_violations), ("upper", &report.upper_violations)] {
                for v in list {
                    let _ = writeln!(out, "{},{},{kind},{}", v.t, name(v.candidate), v.amount);
                }
            }
            out
        }
        Format::Json => {
            let list = |vs: &[crate::quota::QuotaViolation]| {
                vs.iter()
                    .map(|v| json!({"t": v.t, "candidate": name(v.candidate), "amount": v.amount.to_string()}))
                    .collect::<Vec<_>>()
            };
            pretty(&json!({
                "audit": {
                    "upper_ok": report.upper_ok(),
                    "lower_ok": report.lower_ok(),
                    "max_lower_deficit": report.max_lower_deficit.to_string(),
                    "lower_violations": list(&report.lower_violations),
                    "upper_violations": list(&report.upper_violations),
                }
            }))
        }
    }
}

pub fn render_bias(report: &BiasReport, format: Format) -> String {
    match format {
        Format::Text => report.to_table(),
        Format::Csv => {
            let mut out =
                "method,fraction,ci_low,ci_high,favored,not_favored,skipped,smallest_without_seat\n".to_string();
            for m in &report.methods {
                let c = &m.counts;
                let _ = writeln!(
                    out,
                    "{},{:.6},{:.6},{:.6},{},{},{},{}",
                    m.method.name(),
                    m.fraction,
                    m.ci_low,
                    m.ci_high,
                    c.favored,
                    c.not_favored,
                    c.skipped,
                    c.smallest_without_seat
                );
            }
            out
        }
        Format::Json => pretty(report),
    }
}

pub fn render_axiom_table(table: &AxiomTable, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = table.to_text();
            for row in &table.rows {
                for cell in &row.cells {
                    if let Some(w) = &cell.witness {
                        let _ = writeln!(out, "{} / {}: {}", row.method.name(), cell.axiom, w.describe());
                    }
                }
            }
            out
        }
        Format::Csv => {
            let mut out = "method,axiom,verdict,published,counterexamples,tested\n".to_string();
            for row in &table.rows {
                for c in &row.cells {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        row.method.name(),
                        c.axiom,
                        c.verdict.symbol(),
                        if c.published { '+' } else { '-' },
                        c.counterexamples,
                        c.tested
                    );
                }
            }
            out
        }
        Format::Json => pretty(table),
    }
}

fn render_cycle(cycle: &Cycle, profile: &Profile, format: Format) -> String {
    match format {
        Format::Text => {
            let wins: Vec<String> = cycle
                .wins_per_period
                .iter()
                .zip(profile.candidates())
                .map(|(w, c)| format!("{c}: {w}"))
                .collect();
            format!(
                "cycle starts at t = {}, period {}\nwins per period: {}\n",
                cycle.start,
                cycle.period,
                wins.join(", ")
            )
        }
        Format::Csv => {
            let mut out = "candidate,wins_per_period\n".to_string();
            for (c, w) in profile.candidates().iter().zip(&cycle.wins_per_period) {
                let _ = writeln!(out, "{c},{w}");
            }
            out
        }
        Format::Json => pretty(&json!({
            "start": cycle.start,
            "period": cycle.period,
            "candidates": profile.candidates(),
            "wins_per_period": cycle.wins_per_period,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_three_two() -> Input {
        Input::Inline(r#"{"rounds":[[5,3,2]],"repeat":true}"#.into())
    }

    #[test]
    fn commands_round_trip_through_json() {
        let commands = vec![
            Command::Simulate {
                method: Variant::Original,
                profile: five_three_two(),
                horizon: 10,
                audit: true,
            },
            Command::Stabilize { n: 1000, m: 25 },
            Command::Bias(BiasConfig {
                samples: 10,
                ..BiasConfig::default()
            }),
            Command::Compare {
                problem: ProblemInput {
                    votes: Some(vec![79, 7, 6, 3, 2, 1]),
                    shares: None,
                    seats: 20,
                    method: None,
                },
            },
        ];
        for c in commands {
            let json = serde_json::to_string(&c).unwrap();
            let back: Command = serde_json::from_str(&json).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.execute(Format::Json).unwrap(), c.execute(Format::Json).unwrap());
        }
    }

    #[test]
    fn stabilize_outputs() {
        let c = Command::Stabilize { n: 1000, m: 25 };
        assert_eq!(c.execute(Format::Text).unwrap(), "t0 = 184\n");
        assert!(Command::Stabilize { n: 0, m: 3 }.execute(Format::Text).is_err());
    }

    #[test]
    fn simulate_with_audit() {
        let c = Command::Simulate {
            method: Variant::Modified,
            profile: Input::Inline(r#"{"rounds":[[1001,1000,206,182,181,180]],"repeat":true}"#.into()),
            horizon: 11,
            audit: true,
        };
        let out = c.execute(Format::Text).unwrap();
        assert!(out.contains("t = 11: b is 1 below lower quota"));
    }

    #[test]
    fn apportion_needs_a_method() {
        let problem = ProblemInput {
            votes: Some(vec![1, 1]),
            shares: None,
            seats: 2,
            method: None,
        };
        let c = Command::Apportion {
            problem: problem.clone(),
            method: None,
        };
        assert!(matches!(c.execute(Format::Text), Err(Error::Validation(_))));
        let c = Command::Apportion {
            problem,
            method: Some(Method::Frege),
        };
        assert!(c.execute(Format::Text).unwrap().contains("(1, 1)"));
    }

    #[test]
    fn cycle_text() {
        let c = Command::Cycle {
            profile: five_three_two(),
            cap: 1000,
        };
        let out = c.execute(Format::Text).unwrap();
        assert!(out.contains("wins per period: a: 5, b: 3, c: 2"), "{out}");
    }
}
