//! Flattened `path = value` rendering of a JSON report for `--pretty`.

use serde_json::Value;

pub fn render(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (key, text) in rows {
        out.push_str(&format!("{key:<width$}  {text}\n"));
    }
    out
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (key, child) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, child, rows);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_values_become_dotted_paths() {
        let text = render(&json!({"a": {"b": 1, "c": [true, "x"]}, "d": null}));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("a.b") && lines[0].ends_with('1'));
        assert!(lines[1].starts_with("a.c[0]") && lines[1].ends_with("true"));
        assert!(lines[2].ends_with('x'));
        assert!(lines[3].starts_with('d') && lines[3].ends_with("null"));
    }
}
