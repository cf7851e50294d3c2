//! CSV serialization for runs, experiment reports and oracle queries.
//!
//! Reals are written with six significant digits, `.` as the decimal
//! separator and trailing zeros trimmed, so output is byte-stable.

use std::io::{self, Write};

use crate::engine::{AgentRecord, StepRecord};
use crate::experiments::{CellKey, ExperimentReport};

pub const TIMESERIES_HEADER: &str = "step,t_s,cough_zone_mq,bulk_mq,total_mq";
pub const AGENTS_HEADER: &str = "agent_id,role,seat_row,seat_col,weight_fraction,weight_class,in_cough_zone,breath_rate_m3ph,dose_mq";
pub const REPORT_HEADER: &str = "experiment,factor1,factor2,cell_n,mean,sd,unit";
pub const ORACLE_HEADER: &str = "t_s,quanta_mq,integrated_concentration_qs_per_m3,dose_class1_mq,dose_class2_mq,dose_class3_mq,dose_class4_mq";

/// Six significant digits, fixed notation where it stays readable.
pub fn fmt_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // Let the exponent formatter do the rounding, then read the exponent back.
    let sci = format!("{v:.5e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("exponent present");
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let rounded: f64 = sci.parse().expect("formatter output parses");
    let decimals = (5 - exp).max(0) as usize;
    let fixed = format!("{rounded:.decimals$}");
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

pub fn write_timeseries<W: Write>(mut w: W, steps: &[StepRecord]) -> io::Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for r in steps {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.step,
            fmt_sig6(r.t_s),
            fmt_sig6(r.cough_zone_mq),
            fmt_sig6(r.bulk_mq),
            fmt_sig6(r.total_mq)
        )?;
    }
    Ok(())
}

pub fn write_agents<W: Write>(mut w: W, agents: &[AgentRecord]) -> io::Result<()> {
    writeln!(w, "{AGENTS_HEADER}")?;
    for a in agents {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            a.agent_id,
            a.role.as_str(),
            a.seat_row,
            a.seat_col,
            fmt_sig6(a.weight_fraction),
            a.weight_class.get(),
            a.in_cough_zone,
            fmt_sig6(a.breath_rate_m3ph),
            fmt_sig6(a.dose_mq)
        )?;
    }
    Ok(())
}

fn factors(key: CellKey) -> (String, String) {
    match key {
        CellKey::Placement { class, inside } => (
            class.get().to_string(),
            if inside { "inside" } else { "outside" }.to_string(),
        ),
        CellKey::Density { n_agents, class } => (n_agents.to_string(), class.get().to_string()),
        CellKey::Volume {
            volume_m3,
            n_agents,
        } => (fmt_sig6(volume_m3), n_agents.to_string()),
    }
}

pub fn write_report<W: Write>(mut w: W, report: &ExperimentReport) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for cell in &report.cells {
        let (f1, f2) = factors(cell.key);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            report.kind.as_str(),
            f1,
            f2,
            cell.stats.n,
            opt(cell.stats.mean),
            opt(cell.stats.sd),
            cell.unit.as_str()
        )?;
    }
    Ok(())
}
