//! Optional `key = value` config files with `[section]` headers.
//!
//! Keys in the unnamed leading section apply to every subcommand; keys in a
//! section named after the subcommand override them. Command-line flags
//! override both.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path, section: &str) -> Result<Self, String> {
        let ini = Ini::load_from_file(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (name, props) in ini.iter() {
            if name.is_some_and(|s| s != section) {
                continue;
            }
            for (k, v) in props.iter() {
                // named section entries replace general ones
                if name.is_some() || !values.contains_key(k) {
                    values.insert(k.to_owned(), v.to_owned());
                }
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// A scalar value, parsed.
    pub fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|v| v.trim().parse::<T>().map_err(|e| format!("config key `{key}`: {e}"))).transpose()
    }

    /// A comma-separated list, parsed.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|v| parse_list(v).map_err(|e| format!("config key `{key}`: {e}"))).transpose()
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn sections_override_general_keys() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "seed = 4\nn = 3\n\n[verify]\nn = 5, 8\n\n[sharp]\nn = 9").unwrap();
        let c = FileConfig::load(file.path(), "verify").unwrap();
        assert_eq!(c.value::<u64>("seed").unwrap(), Some(4));
        assert_eq!(c.list::<u32>("n").unwrap(), Some(vec![5, 8]));
        assert!(c.list::<u32>("seed").is_ok());
        assert_eq!(c.value::<u32>("missing").unwrap(), None);
    }
}
