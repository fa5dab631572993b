//! Bug-fix commit labelling and file categorization.
//!
//! A commit is bug-fixing when its lowercased message contains any stem of a
//! [`KeywordSet`] as a plain substring. So "minority" matches "minor" and
//! "debugger" matches "bug"; both are accepted.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gitlog::CommitRecord;

/// Stems used to label bug-fixing commits, in the order they were published.
pub const DEFAULT_STEMS: [&str; 29] = [
    "bug",
    "fix",
    "issu",
    "error",
    "correct",
    "proper",
    "deprecat",
    "broke",
    "optimize",
    "patch",
    "solve",
    "slow",
    "obsolete",
    "vulnerab",
    "debug",
    "perf",
    "memory",
    "minor",
    "wart",
    "better",
    "complex",
    "break",
    "investigat",
    "compile",
    "defect",
    "inconsist",
    "crash",
    "problem",
    "resol",
];

/// Extensions (lowercase, no dot) that mark a configuration file.
pub const DEFAULT_CONFIG_EXTENSIONS: [&str; 11] = [
    "yml",
    "yaml",
    "pom",
    "xml",
    "json",
    "toml",
    "ini",
    "cfg",
    "properties",
    "conf",
    "lock",
];

/// Extensions (lowercase, no dot) that mark a source file.
pub const DEFAULT_SOURCE_EXTENSIONS: [&str; 31] = [
    // C / C++
    "c", "h", "cc", "cpp", "cxx", "hh", "hpp", "hxx", // C#
    "cs", // Java
    "java", // JavaScript
    "js", "jsx", "mjs", "cjs", // PHP
    "php", // Python
    "py", // Ruby
    "rb", "erb", "rake", // Shell
    "sh", "bash", "zsh", // HTML / CSS
    "html", "htm", "css", "scss", "sass", "less", // templates seen alongside the above
    "haml", "slim", "twig",
];

/// Substring that marks a test path.
pub const DEFAULT_TEST_MARKER: &str = "test";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("keyword set is empty")]
    EmptyKeywords,
    #[error(
        "invalid keyword stem {0:?}: stems must be non-empty, lowercase and contain no whitespace"
    )]
    InvalidStem(String),
    #[error("cannot compute a bug-fix fraction over zero commits")]
    EmptyInput,
}

/// Ordered list of lowercase stems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct KeywordSet {
    stems: Vec<String>,
}

impl KeywordSet {
    pub fn new<I, S>(stems: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let stems: Vec<String> = stems.into_iter().map(Into::into).collect();
        if stems.is_empty() {
            return Err(LabelError::EmptyKeywords);
        }
        for s in &stems {
            let bad = s.is_empty() || s.chars().any(char::is_whitespace) || s.to_lowercase() != *s;
            if bad {
                return Err(LabelError::InvalidStem(s.clone()));
            }
        }
        Ok(Self { stems })
    }

    pub fn stems(&self) -> &[String] {
        &self.stems
    }

    /// Returns a copy with `stem` appended.
    pub fn with_stem(&self, stem: &str) -> Result<Self, LabelError> {
        let mut stems = self.stems.clone();
        stems.push(stem.to_string());
        Self::new(stems)
    }
}

impl Default for KeywordSet {
    fn default() -> Self {
        Self {
            stems: DEFAULT_STEMS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TryFrom<Vec<String>> for KeywordSet {
    type Error = LabelError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<KeywordSet> for Vec<String> {
    fn from(k: KeywordSet) -> Self {
        k.stems
    }
}

/// True when the lowercased message contains at least one stem.
pub fn classify_commit(message: &str, keywords: &KeywordSet) -> bool {
    if message.is_empty() {
        return false;
    }
    let lower = message.to_lowercase();
    keywords.stems.iter().any(|s| lower.contains(s.as_str()))
}

/// Share of `records` whose message classifies as bug-fixing.
pub fn bugfix_fraction(records: &[CommitRecord], keywords: &KeywordSet) -> Result<f64, LabelError> {
    if records.is_empty() {
        return Err(LabelError::EmptyInput);
    }
    let fixes = records
        .iter()
        .filter(|r| classify_commit(&r.message, keywords))
        .count();
    Ok(fixes as f64 / records.len() as f64)
}

/// Non-overlapping file categories. `Static` files never enter an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileCategory {
    Source,
    Test,
    Config,
    Static,
}

impl FileCategory {
    /// Categories that are analyzed, in report order.
    pub const ANALYZED: [FileCategory; 3] = [
        FileCategory::Config,
        FileCategory::Test,
        FileCategory::Source,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FileCategory::Source => "source",
            FileCategory::Test => "test",
            FileCategory::Config => "config",
            FileCategory::Static => "static",
        }
    }

    /// One-letter label used on plots.
    pub fn letter(self) -> char {
        match self {
            FileCategory::Source => 'S',
            FileCategory::Test => 'T',
            FileCategory::Config => 'C',
            FileCategory::Static => '-',
        }
    }
}

impl fmt::Display for FileCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown file category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for FileCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "source" | "s" => Ok(FileCategory::Source),
            "test" | "t" => Ok(FileCategory::Test),
            "config" | "c" => Ok(FileCategory::Config),
            "static" => Ok(FileCategory::Static),
            _ => Err(UnknownCategory(s.to_string())),
        }
    }
}

/// Path rules for [`FileCategory`]. Precedence is Test > Config > Source > Static.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CategoryRules {
    pub test_marker: String,
    pub config_extensions: Vec<String>,
    pub source_extensions: Vec<String>,
}

impl Default for CategoryRules {
    fn default() -> Self {
        Self {
            test_marker: DEFAULT_TEST_MARKER.to_string(),
            config_extensions: DEFAULT_CONFIG_EXTENSIONS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            source_extensions: DEFAULT_SOURCE_EXTENSIONS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl CategoryRules {
    pub fn categorize(&self, path: &str) -> FileCategory {
        let lower = path.to_lowercase();
        if !self.test_marker.is_empty() && lower.contains(&self.test_marker.to_lowercase()) {
            return FileCategory::Test;
        }
        let Some(ext) = extension(&lower) else {
            return FileCategory::Static;
        };
        if self
            .config_extensions
            .iter()
            .any(|e| e.eq_ignore_ascii_case(ext))
        {
            FileCategory::Config
        } else if self
            .source_extensions
            .iter()
            .any(|e| e.eq_ignore_ascii_case(ext))
        {
            FileCategory::Source
        } else {
            FileCategory::Static
        }
    }
}

/// Categorize with the default rules.
pub fn categorize_file(path: &str) -> FileCategory {
    thread_local! {
        static RULES: CategoryRules = CategoryRules::default();
    }
    RULES.with(|r| r.categorize(path))
}

/// Extension of the last path component; dotfiles like `.travis` have none.
fn extension(path: &str) -> Option<&str> {
    let name = path.rsplit('/').next().unwrap_or(path);
    match name.rfind('.') {
        Some(0) | None => None,
        Some(i) if i + 1 < name.len() => Some(&name[i + 1..]),
        Some(_) => None,
    }
}
