//! Tidy CSV export of result files for plotting.

use serde_json::Value;

use crate::error::{CliError, CliResult};

/// `x` key taken from a kind such as `regret-vs-n`.
pub fn x_key(kind: &str) -> CliResult<&str> {
    kind.rsplit_once("-vs-")
        .map(|(_, x)| x)
        .filter(|x| !x.is_empty())
        .ok_or_else(|| CliError::usage(format!("plot kind {kind:?} must look like <y>-vs-<x>")))
}

/// Mean and standard error of a result, wherever the estimator put them.
fn mean_stderr(result: &Value) -> Option<(f64, f64)> {
    let pick = |v: &Value| Some((v.get("mean")?.as_f64()?, v.get("stderr")?.as_f64().unwrap_or(0.0)));
    pick(result)
        .or_else(|| result.get("average").and_then(pick))
        .or_else(|| result.get("risk").and_then(pick))
        .or_else(|| result.get("total").and_then(pick))
        .or_else(|| Some((result.get("value")?.as_f64()?, result.get("stderr").and_then(Value::as_f64).unwrap_or(0.0))))
}

fn lookup<'a>(doc: &'a Value, key: &str) -> Option<&'a Value> {
    let config = doc.get("config")?;
    config
        .get(key)
        .or_else(|| config.get("process").and_then(|p| p.get(key)))
        .or_else(|| config.get("class").and_then(|c| c.get(key)))
        .or_else(|| doc.get("result").and_then(|r| r.get(key)))
}

fn series_name(doc: &Value) -> String {
    let config = &doc["config"];
    if let Some(label) = config.get("label").and_then(Value::as_str) {
        return label.to_string();
    }
    let part = |v: &Value, key: &str| v.get(key).and_then(Value::as_str).map(str::to_string);
    [
        part(config, "estimator").or_else(|| part(config, "task")),
        config.get("rule").and_then(|r| part(r, "rule")),
        config.get("process").and_then(|p| part(p, "process")),
    ]
    .into_iter()
    .flatten()
    .collect::<Vec<_>>()
    .join("/")
}

/// Rows `x,series,mean,stderr`, sorted by series then x.
pub fn plot_data(kind: &str, docs: &[(String, Value)]) -> CliResult<String> {
    let key = x_key(kind)?;
    if docs.is_empty() {
        return Err(CliError::usage("plot-data needs at least one result file"));
    }
    let mut rows = Vec::with_capacity(docs.len());
    for (name, doc) in docs {
        let x = lookup(doc, key)
            .and_then(Value::as_f64)
            .ok_or_else(|| CliError::usage(format!("{name}: no numeric {key:?} in config or result")))?;
        let (mean, stderr) = doc
            .get("result")
            .and_then(mean_stderr)
            .ok_or_else(|| CliError::usage(format!("{name}: result has no mean or value")))?;
        rows.push((series_name(doc), x, mean, stderr));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record([key, "series", "mean", "stderr"]).map_err(csv_error)?;
    for (series, x, mean, stderr) in rows {
        out.write_record([x.to_string(), series, mean.to_string(), stderr.to_string()])
            .map_err(csv_error)?;
    }
    let bytes = out.into_inner().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::usage(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_from_kind() {
        assert_eq!(x_key("regret-vs-n").unwrap(), "n");
        assert!(x_key("regret").is_err());
        assert!(x_key("regret-vs-").is_err());
    }

    #[test]
    fn rows_are_sorted() {
        let doc = |n: usize, mean: f64| {
            json!({"config": {"task": "regret", "estimator": "gen", "n": n, "seed": 1}, "result": {"mean": mean, "stderr": 0.1}})
        };
        let csv = plot_data("regret-vs-n", &[("b".into(), doc(16, 0.2)), ("a".into(), doc(8, 0.3))]).unwrap();
        assert_eq!(csv, "n,series,mean,stderr\n8,gen,0.3,0.1\n16,gen,0.2,0.1\n");
    }

    #[test]
    fn missing_key_is_an_error() {
        let doc = json!({"config": {"task": "regret", "seed": 1}, "result": {"mean": 0.1}});
        assert!(plot_data("regret-vs-n", &[("f".into(), doc)]).is_err());
        assert!(plot_data("regret-vs-n", &[]).is_err());
    }
}
