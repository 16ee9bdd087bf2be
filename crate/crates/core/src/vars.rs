//! The ordered variable list that fixes the working field.
//!
//! Position 0 is the most significant variable: a monomial is compared with 1
//! by looking at the earliest variable it mentions. Free variables come
//! first, then slack variables, then the variables whose constant term is
//! taken.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Free,
    Slack,
    Ct,
}

impl Role {
    fn rank(self) -> u8 {
        match self {
            Role::Free => 0,
            Role::Slack => 1,
            Role::Ct => 2,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Free => "free",
            Role::Slack => "slack",
            Role::Ct => "ct",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Role::Free),
            "slack" => Ok(Role::Slack),
            "ct" => Ok(Role::Ct),
            other => Err(Error::Invalid(format!("unknown variable role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: Role,
}

/// Index of a variable inside its [`VariableTable`].
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableTable {
    vars: Vec<Variable>,
}

impl VariableTable {
    /// Builds a table; rejects duplicate names and any ordering where a free
    /// or slack variable follows a ct variable, or a free variable follows a
    /// slack variable.
    pub fn new(vars: Vec<Variable>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
            if i > 0 && vars[i - 1].role.rank() > v.role.rank() {
                return Err(Error::BadOrder(format!(
                    "{} variable `{}` follows {} variable `{}`",
                    v.role,
                    v.name,
                    vars[i - 1].role,
                    vars[i - 1].name
                )));
            }
        }
        Ok(VariableTable { vars })
    }

    pub fn builder() -> VariableTableBuilder {
        VariableTableBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id].name
    }

    pub fn role(&self, id: VarId) -> Role {
        self.vars[id].role
    }

    pub fn id(&self, name: &str) -> Result<VarId> {
        self.vars.iter().position(|v| v.name == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn ids_with_role(&self, role: Role) -> Vec<VarId> {
        (0..self.vars.len()).filter(|&i| self.vars[i].role == role).collect()
    }

    /// Canonical one-line rendering, used as a checkpoint header.
    pub fn header(&self) -> String {
        self.vars.iter().map(|v| format!("{}:{}", v.name, v.role)).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_header(line: &str) -> Result<Self> {
        let vars = line
            .split_whitespace()
            .map(|tok| {
                let (name, role) =
                    tok.rsplit_once(':').ok_or_else(|| Error::Invalid(format!("bad variable entry `{tok}`")))?;
                Ok(Variable { name: name.to_string(), role: role.parse()? })
            })
            .collect::<Result<Vec<_>>>()?;
        VariableTable::new(vars)
    }
}

#[derive(Debug, Default)]
pub struct VariableTableBuilder {
    vars: Vec<Variable>,
}

impl VariableTableBuilder {
    pub fn var(mut self, name: impl Into<String>, role: Role) -> Self {
        self.vars.push(Variable { name: name.into(), role });
        self
    }

    pub fn free(self, name: impl Into<String>) -> Self {
        self.var(name, Role::Free)
    }

    pub fn slack(self, name: impl Into<String>) -> Self {
        self.var(name, Role::Slack)
    }

    pub fn ct(self, name: impl Into<String>) -> Self {
        self.var(name, Role::Ct)
    }

    pub fn build(self) -> Result<VariableTable> {
        VariableTable::new(self.vars)
    }
}
