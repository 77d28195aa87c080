use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{io_err, CellStatus, DerivationView, Detail, Report, ReportError};
use crate::equivalence::DerivationTree;

const STYLE: &str = "body{font-family:sans-serif;margin:1.5em}\
table{border-collapse:collapse}\
td,th{border:1px solid #ccc;padding:2px 8px;text-align:left}\
td.PASS{background:#dfd}td.FAIL{background:#fdd}td.ERROR{background:#fc9}td.NA{color:#999}\
pre{background:#f6f6f6;padding:.5em}\
.add{color:#070}.del{color:#a00}.hunk{color:#06a}\
ul.tree{list-style:none;padding-left:1.2em}code{font-size:90%}";

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn page(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n{body}</body>\n</html>\n",
        escape(title)
    )
}

fn css_class(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Na => "NA",
        other => other.name(),
    }
}

fn file_part(entry: &str) -> String {
    entry.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' }).collect()
}

fn diff_html(diff: &str) -> String {
    let mut out = String::from("<pre>");
    for line in diff.lines() {
        let class = if line.starts_with("+++") || line.starts_with("---") {
            ""
        } else if line.starts_with('+') {
            "add"
        } else if line.starts_with('-') {
            "del"
        } else if line.starts_with("@@") {
            "hunk"
        } else {
            ""
        };
        if class.is_empty() {
            out.push_str(&escape(line));
        } else {
            let _ = write!(out, "<span class=\"{class}\">{}</span>", escape(line));
        }
        out.push('\n');
    }
    out.push_str("</pre>\n");
    out
}

fn tree_html(t: &DerivationTree, view: &DerivationView, out: &mut String) {
    match t {
        DerivationTree::Leaf(id) => {
            let fact = view.premises.get(id).map(String::as_str).unwrap_or("");
            let _ = write!(out, "<li><code>{}</code> {}</li>", escape(id), escape(fact));
        }
        DerivationTree::Node(rule, kids) => {
            let _ = write!(out, "<li><details open><summary><b>{}</b></summary><ul class=\"tree\">", escape(rule));
            for k in kids {
                tree_html(k, view, out);
            }
            out.push_str("</ul></details></li>");
        }
    }
}

fn derivations_html(views: &[DerivationView]) -> String {
    let mut out = String::new();
    for v in views {
        let _ = write!(out, "<h3>{}: <code>{}</code></h3>\n<ul class=\"tree\">", v.side.name(), escape(&v.fact));
        tree_html(&v.tree, v, &mut out);
        out.push_str("</ul>\n");
    }
    out
}

/// Writes `index.html` and one page per detailed cell into `out`; returns
/// the files written.
pub fn render_report(report: &Report, out: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::new();
    let mut rows = String::new();
    for (ri, row) in report.rows.iter().enumerate() {
        let _ = write!(rows, "<tr><td>{}</td>", escape(&row.entry));
        for (ci, cell) in row.cells.iter().enumerate() {
            let column = &report.columns[ci];
            let label = cell.status.name();
            let Some(detail) = &cell.detail else {
                let _ = write!(rows, "<td class=\"{}\">{label}</td>", css_class(cell.status));
                continue;
            };
            let rel = format!("details/{ri:04}-{}-{}.html", file_part(&row.entry), file_part(column));
            let title = format!("{} {} {}", row.entry, column, label);
            let (body, marker) = match detail {
                Detail::Diff(d) => (diff_html(d), "&Delta;"),
                Detail::Log(l) => (format!("<pre>{}</pre>\n", escape(l)), "log"),
                Detail::Derivations(v) => (derivations_html(v), "&#x1F333;"),
            };
            let html = page(
                &title,
                &format!("<h1>{}</h1>\n<p><a href=\"../index.html\">back</a></p>\n{body}", escape(&title)),
            );
            let path = out.join(&rel);
            std::fs::create_dir_all(path.parent().expect("details")).map_err(io_err(out))?;
            std::fs::write(&path, html).map_err(io_err(&path))?;
            written.push(path);
            let _ =
                write!(rows, "<td class=\"{}\">{label} <a href=\"{rel}\">{marker}</a></td>", css_class(cell.status));
        }
        rows.push_str("</tr>\n");
    }

    let mut body = String::from("<h1>daleq report</h1>\n<table class=\"meta\">\n");
    let m = &report.metadata;
    for (k, v) in [
        ("a", m.input_a.as_str()),
        ("b", m.input_b.as_str()),
        ("mode", m.mode.as_str()),
        ("version", m.tool_version.as_str()),
        ("started", m.started.as_str()),
    ] {
        let _ = writeln!(body, "<tr><th>{k}</th><td>{}</td></tr>", escape(v));
    }
    let _ = writeln!(body, "<tr><th>wall clock (ms)</th><td>{}</td></tr>\n</table>", m.wall_clock_ms);
    body.push_str("<h2>Results</h2>\n<table>\n<tr><th>entry</th>");
    for c in &report.columns {
        let _ = write!(body, "<th>{}</th>", escape(c));
    }
    body.push_str("</tr>\n");
    body.push_str(&rows);
    for s in CellStatus::ALL {
        let _ = write!(body, "<tr class=\"summary\"><th>{}</th>", s.name());
        for counts in report.summary() {
            let _ = write!(body, "<td>{}</td>", counts[&s]);
        }
        body.push_str("</tr>\n");
    }
    body.push_str("</table>\n");
    let index = out.join("index.html");
    std::fs::write(&index, page("daleq report", &body)).map_err(io_err(&index))?;
    written.insert(0, index);
    Ok(written)
}
