use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "postsel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Deterministic record of one invocation. Re-running `command` reproduces
/// it byte for byte, so it carries no timestamps or host details.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub config: Value,
    pub outputs: Value,
    pub ok: bool,
}

impl RunReport {
    pub fn new(
        command: Vec<String>,
        seed: Option<u64>,
        config: Value,
        outputs: Value,
        ok: bool,
    ) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            seed,
            config,
            outputs,
            ok,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }
}

/// Echo of the invocation with the resolved seed made explicit.
pub fn command_echo(args: &[String], seed: Option<u64>) -> Vec<String> {
    let mut echo = vec![TOOL.to_string()];
    echo.extend(args.iter().cloned());
    let explicit = args
        .iter()
        .any(|a| a == "--seed" || a.starts_with("--seed="));
    if let (Some(seed), false) = (seed, explicit) {
        echo.push("--seed".into());
        echo.push(seed.to_string());
    }
    echo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn resolved_seed_is_appended_once() {
        let echo = command_echo(&args(&["sweep", "--mode", "loss"]), Some(7));
        assert_eq!(
            echo,
            args(&["postsel", "sweep", "--mode", "loss", "--seed", "7"])
        );
        let echo = command_echo(&args(&["sweep", "--seed", "7"]), Some(7));
        assert_eq!(echo, args(&["postsel", "sweep", "--seed", "7"]));
        let echo = command_echo(&args(&["sweep", "--seed=7"]), Some(7));
        assert_eq!(echo, args(&["postsel", "sweep", "--seed=7"]));
        let echo = command_echo(&args(&["weak-values"]), None);
        assert_eq!(echo, args(&["postsel", "weak-values"]));
    }

    #[test]
    fn report_json_is_stable() {
        let r = RunReport::new(
            args(&["postsel"]),
            None,
            Value::Null,
            serde_json::json!({"x": 0.1}),
            true,
        );
        let a = r.to_json();
        assert_eq!(a, r.to_json());
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"x\": 0.1"));
    }
}
