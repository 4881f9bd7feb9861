use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

/// `key = value` lines; `#` starts a comment. Keys match long flag names.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("config key '{key}': {e}")))
            .transpose()
    }

    /// Flag value, else file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => self.get(key)?.ok_or_else(|| format!("missing required --{key}")),
        }
    }
}

/// `s:t` pairs separated by commas, e.g. `0.5:1,1:1`.
pub fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|pair| {
            let (s, t) = pair.split_once(':').ok_or_else(|| format!("grid point '{pair}' is not s:t"))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("grid point '{pair}': {e}"));
            Ok((num(s)?, num(t)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let c = FileConfig::parse("# header\nmax_order = 3\nseed=7 # trailing\n\n").unwrap();
        assert_eq!(c.get::<usize>("max-order").unwrap(), Some(3));
        assert_eq!(c.pick(None, "seed", 1u64).unwrap(), 7);
        assert_eq!(c.pick(Some(9), "seed", 1u64).unwrap(), 9);
        assert_eq!(c.pick(None, "reps", 5usize).unwrap(), 5);
        assert!(c.require::<f64>(None, "s").is_err());
        assert!(FileConfig::parse("novalue").is_err());
        assert!(FileConfig::parse("n = x").unwrap().get::<usize>("n").is_err());
    }

    #[test]
    fn grid() {
        assert_eq!(parse_grid("0.5:1, 1:0").unwrap(), vec![(0.5, 1.0), (1.0, 0.0)]);
        assert!(parse_grid("0.5").is_err());
        assert!(parse_grid("a:1").is_err());
    }
}
