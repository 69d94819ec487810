use std::io::Write;

use serde_json::{Map, Value};

use crate::CliError;

/// Nested objects become dotted column names; arrays become `name.0`, `name.1`, ...
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// One record: a JSON line, or a CSV header plus one row.
pub fn write_record<W: Write>(
    record: &Map<String, Value>,
    csv_mode: bool,
    mut out: W,
) -> Result<(), CliError> {
    if !csv_mode {
        writeln!(out, "{}", Value::Object(record.clone()))?;
        return Ok(());
    }
    let mut fields = Vec::new();
    flatten("", &Value::Object(record.clone()), &mut fields);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(fields.iter().map(|(k, _)| k))?;
    w.write_record(fields.iter().map(|(_, v)| v))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattens_nested_values() {
        let Value::Object(rec) =
            json!({"n": 5, "cost": {"a": 1.5, "b": [1, 2]}, "none": null, "s": "x"})
        else {
            unreachable!()
        };
        let mut buf = Vec::new();
        write_record(&rec, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n,cost.a,cost.b.0,cost.b.1,none,s\n5,1.5,1,2,,x\n");
    }
}
