//! Report lines shared by the verdict-producing checks. Machine lines are
//! `key=value`; everything meant for people renders as a `# ` comment.

/// One output line of a check report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportLine {
    Prose(String),
    Kv(String, String),
}

impl ReportLine {
    pub fn prose(text: impl Into<String>) -> Self {
        ReportLine::Prose(text.into())
    }

    pub fn kv(key: impl Into<String>, value: impl std::fmt::Display) -> Self {
        ReportLine::Kv(key.into(), value.to_string())
    }

    pub fn render(&self) -> String {
        match self {
            ReportLine::Prose(t) => format!("# {t}"),
            ReportLine::Kv(k, v) => format!("{k}={v}"),
        }
    }
}

/// Render a full report, one line each, trailing newline included.
pub fn render_report(lines: &[ReportLine]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&line.render());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_render_in_the_two_shapes() {
        let lines = vec![
            ReportLine::prose("projection check"),
            ReportLine::kv("J_broad", true),
        ];
        assert_eq!(render_report(&lines), "# projection check\nJ_broad=true\n");
    }
}
