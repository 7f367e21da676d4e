//! Command reports rendered either as aligned text or as `key=value` lines.

use std::fmt::Write as _;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    fields: Vec<(String, String)>,
    tables: Vec<Table>,
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    /// In machine mode each cell becomes `name.row.column=value`.
    pub fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> &mut Self {
        self.tables.push(Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, machine: bool) -> String {
        if machine {
            self.render_machine()
        } else {
            self.render_human()
        }
    }

    fn render_machine(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k}={v}");
        }
        for t in &self.tables {
            for (r, row) in t.rows.iter().enumerate() {
                for (h, v) in t.header.iter().zip(row) {
                    let _ = writeln!(out, "{}.{r}.{h}={v}", t.name);
                }
            }
        }
        out
    }

    fn render_human(&self) -> String {
        let mut out = String::new();
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{:width$}  {v}", k.replace('_', " "));
        }
        for t in &self.tables {
            let _ = writeln!(out, "\n{}", t.name.replace('_', " "));
            let mut widths: Vec<usize> = t.header.iter().map(|h| h.len()).collect();
            for row in &t.rows {
                for (w, v) in widths.iter_mut().zip(row) {
                    *w = (*w).max(v.len());
                }
            }
            let line = |cells: &[String]| {
                let parts: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                parts.join("  ")
            };
            let _ = writeln!(out, "{}", line(&t.header));
            for row in &t.rows {
                let _ = writeln!(out, "{}", line(row));
            }
        }
        out
    }
}

/// Table-style scientific notation, e.g. `1.93e-5`.
pub fn sci(v: f64) -> String {
    format!("{v:.2e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_renderings() {
        let mut r = Report::default();
        r.field("accuracy", "0.9500").field("samples", 20);
        r.table("cells", &["lambda1", "accuracy"], vec![vec!["0.1".into(), "0.5".into()]]);
        let m = r.render(true);
        assert_eq!(m, "accuracy=0.9500\nsamples=20\ncells.0.lambda1=0.1\ncells.0.accuracy=0.5\n");
        let h = r.render(false);
        assert!(h.starts_with("accuracy  0.9500\nsamples   20\n"));
        assert!(h.contains("lambda1  accuracy"));
        assert_eq!(r.get("samples"), Some("20"));
    }

    #[test]
    fn scientific_format() {
        assert_eq!(sci(1.93e-5), "1.93e-5");
        assert_eq!(sci(0.000123456), "1.23e-4");
    }
}
