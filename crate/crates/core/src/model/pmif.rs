//! PMIF: the JSON interchange format for [`ProgramModel`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::*;

pub const PMIF_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum PmifError {
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unresolved reference at {path}: `{name}` is not declared")]
    Unresolved { path: String, name: String },
    #[error("inheritance cycle through {}", classes.join(" -> "))]
    InheritanceCycle { classes: Vec<String> },
    #[error("invalid model at {path}: {message}")]
    Invalid { path: String, message: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> PmifError {
    PmifError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> PmifError {
    PmifError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireModel {
    pmif_version: u32,
    name: String,
    classes: Vec<WireClass>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireClass {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extends: Option<String>,
    attributes: Vec<WireTyped>,
    methods: Vec<WireMethod>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireTyped {
    name: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireMethod {
    name: String,
    params: Vec<WireTyped>,
    #[serde(rename = "return")]
    ret: String,
    cfg: WireCfg,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCfg {
    entry: u32,
    blocks: Vec<WireBlock>,
    edges: Vec<WireEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireBlock {
    id: u32,
    statements: Vec<WireStmt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    branch: Option<WireBranch>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum WireBranchKind {
    If,
    Switch,
    While,
    For,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireBranch {
    kind: WireBranchKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arms: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    predicate: Option<WirePred>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum WireStmtKind {
    Call,
    AttributeAccess,
    Assignment,
    Return,
    Other,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireStmt {
    id: u32,
    line: u32,
    kind: WireStmtKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    call: Option<WireCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    assigns: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCall {
    target_class: String,
    target_member: String,
    member_kind: MemberKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEdge {
    from: u32,
    to: u32,
    kind: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WirePred {
    Node(WireNode),
    Leaf(WireLeaf),
    Opaque(WireOpaque),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireNode {
    op: String,
    args: Vec<WirePred>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireLeaf {
    var: String,
    cmp: String,
    rhs: WireOperand,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireOpaque {
    opaque: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireOperand {
    Bool(bool),
    Num(f64),
    Var(String),
}

/// Parses and validates a PMIF document.
pub fn load_pmif(bytes: &[u8]) -> Result<ProgramModel, PmifError> {
    let text = std::str::from_utf8(bytes).map_err(|e| schema("$", format!("not UTF-8: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let wire: WireModel = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(format!("$.{path}"), e.into_inner().to_string())
    })?;
    if wire.pmif_version != PMIF_VERSION {
        return Err(schema(
            "$.pmif_version",
            format!(
                "unsupported version {} (expected {PMIF_VERSION})",
                wire.pmif_version
            ),
        ));
    }
    let model = from_wire(wire)?;
    validate(&model)?;
    Ok(model)
}

/// Serializes a model as pretty-printed PMIF.
pub fn save_pmif(model: &ProgramModel) -> Vec<u8> {
    let wire = to_wire(model);
    let mut out = serde_json::to_vec_pretty(&wire).expect("PMIF serialization is infallible");
    out.push(b'\n');
    out
}

fn from_wire(wire: WireModel) -> Result<ProgramModel, PmifError> {
    let mut classes = Vec::with_capacity(wire.classes.len());
    for (ci, c) in wire.classes.into_iter().enumerate() {
        let cpath = format!("$.classes[{ci}]");
        let attributes = c
            .attributes
            .into_iter()
            .map(|a| AttributeDecl {
                name: a.name,
                ty: TypeRef::parse(&a.ty),
            })
            .collect();
        let mut methods = Vec::with_capacity(c.methods.len());
        for (mi, m) in c.methods.into_iter().enumerate() {
            let mpath = format!("{cpath}.methods[{mi}]");
            let params = m
                .params
                .into_iter()
                .map(|p| Param {
                    name: p.name,
                    ty: TypeRef::parse(&p.ty),
                })
                .collect();
            methods.push(MethodDecl {
                name: m.name,
                params,
                return_type: TypeRef::parse(&m.ret),
                body: cfg_from_wire(m.cfg, &format!("{mpath}.cfg"))?,
            });
        }
        classes.push(ClassDecl {
            name: c.name,
            extends: c.extends,
            attributes,
            methods,
        });
    }
    Ok(ProgramModel {
        name: wire.name,
        classes,
    })
}

fn cfg_from_wire(cfg: WireCfg, path: &str) -> Result<Cfg, PmifError> {
    let mut blocks = Vec::with_capacity(cfg.blocks.len());
    for (bi, b) in cfg.blocks.into_iter().enumerate() {
        let bpath = format!("{path}.blocks[{bi}]");
        let mut statements = Vec::with_capacity(b.statements.len());
        for (si, s) in b.statements.into_iter().enumerate() {
            let spath = format!("{bpath}.statements[{si}]");
            let kind = match s.kind {
                WireStmtKind::Call => StmtKind::Call,
                WireStmtKind::AttributeAccess => StmtKind::AttributeAccess,
                WireStmtKind::Assignment => StmtKind::Assignment,
                WireStmtKind::Return => StmtKind::Return,
                WireStmtKind::Other => StmtKind::Other,
            };
            let call_site = s.call.map(|c| CallSite {
                target_class: c.target_class,
                target_member: c.target_member,
                member_kind: c.member_kind,
            });
            let expected = match &call_site {
                Some(c) if c.member_kind == MemberKind::Method => Some(StmtKind::Call),
                Some(_) => Some(StmtKind::AttributeAccess),
                None => None,
            };
            let consistent = match expected {
                Some(k) => k == kind,
                None => !matches!(kind, StmtKind::Call | StmtKind::AttributeAccess),
            };
            if !consistent {
                return Err(schema(
                    format!("{spath}.kind"),
                    "statement kind must be `call` (method) or `attribute-access` (attribute) exactly when `call` is present",
                ));
            }
            statements.push(Statement {
                id: s.id,
                line: s.line,
                kind,
                call_site,
                assigns: s.assigns,
            });
        }
        let terminator = match b.branch {
            None => None,
            Some(br) => Some(branch_from_wire(br, &format!("{bpath}.branch"))?),
        };
        blocks.push(BasicBlock {
            id: b.id,
            statements,
            terminator,
        });
    }
    let mut edges = Vec::with_capacity(cfg.edges.len());
    for (ei, e) in cfg.edges.into_iter().enumerate() {
        let kind = parse_edge_kind(&e.kind).ok_or_else(|| {
            schema(
                format!("{path}.edges[{ei}].kind"),
                format!("unknown edge kind `{}`", e.kind),
            )
        })?;
        edges.push(CfgEdge {
            from: e.from,
            to: e.to,
            kind,
        });
    }
    Ok(Cfg {
        entry: cfg.entry,
        blocks,
        edges,
    })
}

fn parse_edge_kind(s: &str) -> Option<EdgeKind> {
    Some(match s {
        "fallthrough" => EdgeKind::Fallthrough,
        "branch-true" => EdgeKind::BranchTrue,
        "branch-false" => EdgeKind::BranchFalse,
        "loop-body" => EdgeKind::LoopBody,
        "loop-exit" => EdgeKind::LoopExit,
        other => EdgeKind::Case(other.strip_prefix("case:")?.parse().ok()?),
    })
}

fn branch_from_wire(br: WireBranch, path: &str) -> Result<BranchStmt, PmifError> {
    match br.kind {
        WireBranchKind::Switch => {
            if br.predicate.is_some() {
                return Err(schema(
                    format!("{path}.predicate"),
                    "switch branches carry no predicate",
                ));
            }
            let arms = br
                .arms
                .ok_or_else(|| schema(format!("{path}.arms"), "switch requires an arm count"))?;
            if arms == 0 {
                return Err(schema(
                    format!("{path}.arms"),
                    "switch arm count must be at least 1",
                ));
            }
            Ok(BranchStmt::Switch { arms })
        }
        kind => {
            if br.arms.is_some() {
                return Err(schema(
                    format!("{path}.arms"),
                    "only switch branches carry an arm count",
                ));
            }
            let pred = br
                .predicate
                .ok_or_else(|| schema(format!("{path}.predicate"), "missing predicate"))?;
            let pred = pred_from_wire(pred, &format!("{path}.predicate"))?;
            Ok(match kind {
                WireBranchKind::If => BranchStmt::If(pred),
                WireBranchKind::While => BranchStmt::While(pred),
                WireBranchKind::For => BranchStmt::For(pred),
                WireBranchKind::Switch => unreachable!(),
            })
        }
    }
}

fn pred_from_wire(p: WirePred, path: &str) -> Result<PredicateExpr, PmifError> {
    match p {
        WirePred::Opaque(o) => Ok(PredicateExpr::Opaque(o.opaque)),
        WirePred::Leaf(l) => {
            if l.var.is_empty() {
                return Err(schema(format!("{path}.var"), "empty variable name"));
            }
            let op = Comparator::from_symbol(&l.cmp).ok_or_else(|| {
                schema(
                    format!("{path}.cmp"),
                    format!("unknown comparator `{}`", l.cmp),
                )
            })?;
            let rhs = match l.rhs {
                WireOperand::Bool(b) => Operand::Bool(b),
                WireOperand::Num(n) => Operand::Num(n),
                WireOperand::Var(v) => Operand::Var(v),
            };
            Ok(PredicateExpr::Compare(Comparison {
                var: l.var,
                op,
                rhs,
            }))
        }
        WirePred::Node(n) => {
            let mut args = Vec::with_capacity(n.args.len());
            for (i, a) in n.args.into_iter().enumerate() {
                args.push(pred_from_wire(a, &format!("{path}.args[{i}]"))?);
            }
            match n.op.as_str() {
                "and" | "or" if args.is_empty() => Err(schema(
                    format!("{path}.args"),
                    "`and`/`or` need at least one argument",
                )),
                "and" => Ok(PredicateExpr::And(args)),
                "or" => Ok(PredicateExpr::Or(args)),
                "not" if args.len() == 1 => Ok(PredicateExpr::Not(Box::new(args.pop().unwrap()))),
                "not" => Err(schema(
                    format!("{path}.args"),
                    "`not` takes exactly one argument",
                )),
                other => Err(schema(
                    format!("{path}.op"),
                    format!("unknown operator `{other}`"),
                )),
            }
        }
    }
}

fn to_wire(model: &ProgramModel) -> WireModel {
    WireModel {
        pmif_version: PMIF_VERSION,
        name: model.name.clone(),
        classes: model
            .classes
            .iter()
            .map(|c| WireClass {
                name: c.name.clone(),
                extends: c.extends.clone(),
                attributes: c
                    .attributes
                    .iter()
                    .map(|a| WireTyped {
                        name: a.name.clone(),
                        ty: a.ty.to_string(),
                    })
                    .collect(),
                methods: c.methods.iter().map(method_to_wire).collect(),
            })
            .collect(),
    }
}

fn method_to_wire(m: &MethodDecl) -> WireMethod {
    WireMethod {
        name: m.name.clone(),
        params: m
            .params
            .iter()
            .map(|p| WireTyped {
                name: p.name.clone(),
                ty: p.ty.to_string(),
            })
            .collect(),
        ret: m.return_type.to_string(),
        cfg: WireCfg {
            entry: m.body.entry,
            blocks: m
                .body
                .blocks
                .iter()
                .map(|b| WireBlock {
                    id: b.id,
                    statements: b.statements.iter().map(stmt_to_wire).collect(),
                    branch: b.terminator.as_ref().map(branch_to_wire),
                })
                .collect(),
            edges: m
                .body
                .edges
                .iter()
                .map(|e| WireEdge {
                    from: e.from,
                    to: e.to,
                    kind: e.kind.to_string(),
                })
                .collect(),
        },
    }
}

fn stmt_to_wire(s: &Statement) -> WireStmt {
    WireStmt {
        id: s.id,
        line: s.line,
        kind: match s.kind {
            StmtKind::Call => WireStmtKind::Call,
            StmtKind::AttributeAccess => WireStmtKind::AttributeAccess,
            StmtKind::Assignment => WireStmtKind::Assignment,
            StmtKind::Return => WireStmtKind::Return,
            StmtKind::Other => WireStmtKind::Other,
        },
        call: s.call_site.as_ref().map(|c| WireCall {
            target_class: c.target_class.clone(),
            target_member: c.target_member.clone(),
            member_kind: c.member_kind,
        }),
        assigns: s.assigns.clone(),
    }
}

fn branch_to_wire(b: &BranchStmt) -> WireBranch {
    let (kind, arms) = match b {
        BranchStmt::If(_) => (WireBranchKind::If, None),
        BranchStmt::While(_) => (WireBranchKind::While, None),
        BranchStmt::For(_) => (WireBranchKind::For, None),
        BranchStmt::Switch { arms } => (WireBranchKind::Switch, Some(*arms)),
    };
    WireBranch {
        kind,
        arms,
        predicate: b.predicate().map(pred_to_wire),
    }
}

fn pred_to_wire(p: &PredicateExpr) -> WirePred {
    match p {
        PredicateExpr::Compare(c) => WirePred::Leaf(WireLeaf {
            var: c.var.clone(),
            cmp: c.op.symbol().to_string(),
            rhs: match &c.rhs {
                Operand::Num(n) => WireOperand::Num(*n),
                Operand::Bool(b) => WireOperand::Bool(*b),
                Operand::Var(v) => WireOperand::Var(v.clone()),
            },
        }),
        PredicateExpr::Opaque(s) => WirePred::Opaque(WireOpaque { opaque: s.clone() }),
        PredicateExpr::And(args) => WirePred::Node(WireNode {
            op: "and".into(),
            args: args.iter().map(pred_to_wire).collect(),
        }),
        PredicateExpr::Or(args) => WirePred::Node(WireNode {
            op: "or".into(),
            args: args.iter().map(pred_to_wire).collect(),
        }),
        PredicateExpr::Not(a) => WirePred::Node(WireNode {
            op: "not".into(),
            args: vec![pred_to_wire(a)],
        }),
    }
}

/// Checks every [`ProgramModel`] invariant.
pub fn validate(model: &ProgramModel) -> Result<(), PmifError> {
    let mut class_names = BTreeSet::new();
    for c in &model.classes {
        if !class_names.insert(c.name.as_str()) {
            return Err(invalid(
                format!("classes[{}]", c.name),
                "duplicate class name",
            ));
        }
    }
    let resolve = |path: String, ty: &TypeRef| -> Result<(), PmifError> {
        match ty {
            TypeRef::Class(name) if !class_names.contains(name.as_str()) => {
                Err(PmifError::Unresolved {
                    path,
                    name: name.clone(),
                })
            }
            _ => Ok(()),
        }
    };

    for c in &model.classes {
        let cpath = format!("classes[{}]", c.name);
        if let Some(parent) = &c.extends {
            if parent == &c.name {
                return Err(PmifError::InheritanceCycle {
                    classes: vec![c.name.clone(), c.name.clone()],
                });
            }
            if !class_names.contains(parent.as_str()) {
                return Err(PmifError::Unresolved {
                    path: format!("{cpath}.extends"),
                    name: parent.clone(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for a in &c.attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(invalid(
                    format!("{cpath}.attributes[{}]", a.name),
                    "duplicate attribute name",
                ));
            }
            if a.ty == TypeRef::Void {
                return Err(invalid(
                    format!("{cpath}.attributes[{}]", a.name),
                    "attribute cannot be void",
                ));
            }
            resolve(format!("{cpath}.attributes[{}].type", a.name), &a.ty)?;
        }
        let mut seen = BTreeSet::new();
        for m in &c.methods {
            let mpath = format!("{cpath}.methods[{}]", m.name);
            if !seen.insert(m.name.as_str()) {
                return Err(invalid(mpath, "duplicate method name"));
            }
            for p in &m.params {
                resolve(format!("{mpath}.params[{}].type", p.name), &p.ty)?;
            }
            resolve(format!("{mpath}.return"), &m.return_type)?;
            validate_cfg(model, &m.body, &format!("{mpath}.cfg"))?;
        }
    }

    // Inheritance must be acyclic.
    let parent: BTreeMap<&str, &str> = model
        .classes
        .iter()
        .filter_map(|c| c.extends.as_deref().map(|p| (c.name.as_str(), p)))
        .collect();
    for c in &model.classes {
        let mut trail = vec![c.name.as_str()];
        let mut cur = c.name.as_str();
        while let Some(&p) = parent.get(cur) {
            if let Some(pos) = trail.iter().position(|&t| t == p) {
                let mut classes: Vec<String> = trail[pos..].iter().map(|s| s.to_string()).collect();
                classes.push(p.to_string());
                return Err(PmifError::InheritanceCycle { classes });
            }
            trail.push(p);
            cur = p;
        }
    }
    Ok(())
}

fn validate_cfg(model: &ProgramModel, cfg: &Cfg, path: &str) -> Result<(), PmifError> {
    let mut ids = BTreeSet::new();
    for b in &cfg.blocks {
        if !ids.insert(b.id) {
            return Err(invalid(
                format!("{path}.blocks[{}]", b.id),
                "duplicate block id",
            ));
        }
    }
    if !ids.contains(&cfg.entry) {
        return Err(invalid(
            format!("{path}.entry"),
            format!("entry block {} does not exist", cfg.entry),
        ));
    }
    for e in &cfg.edges {
        if !ids.contains(&e.from) || !ids.contains(&e.to) {
            return Err(invalid(
                format!("{path}.edges"),
                format!("edge {} -> {} references a missing block", e.from, e.to),
            ));
        }
    }

    let mut stmt_ids = BTreeSet::new();
    for b in &cfg.blocks {
        let bpath = format!("{path}.blocks[{}]", b.id);
        for s in &b.statements {
            if !stmt_ids.insert(s.id) {
                return Err(invalid(
                    format!("{bpath}.statements[{}]", s.id),
                    "duplicate statement id",
                ));
            }
            if let Some(call) = &s.call_site {
                let cpath = format!("{bpath}.statements[{}].call", s.id);
                if model.class(&call.target_class).is_none() {
                    return Err(PmifError::Unresolved {
                        path: format!("{cpath}.target_class"),
                        name: call.target_class.clone(),
                    });
                }
                if !model.member_exists(&call.target_class, &call.target_member, call.member_kind) {
                    return Err(PmifError::Unresolved {
                        path: format!("{cpath}.target_member"),
                        name: format!("{}.{}", call.target_class, call.target_member),
                    });
                }
            }
        }

        let out: Vec<EdgeKind> = cfg.successors(b.id).map(|e| e.kind).collect();
        let mut sorted = out.clone();
        sorted.sort();
        let expected: Vec<EdgeKind> = match &b.terminator {
            None => {
                if out.iter().any(|k| *k != EdgeKind::Fallthrough) || out.len() > 1 {
                    return Err(invalid(
                        bpath,
                        "a block without a branch has at most one fallthrough edge",
                    ));
                }
                continue;
            }
            Some(BranchStmt::If(_)) => vec![EdgeKind::BranchTrue, EdgeKind::BranchFalse],
            Some(BranchStmt::While(_)) | Some(BranchStmt::For(_)) => {
                vec![EdgeKind::LoopBody, EdgeKind::LoopExit]
            }
            Some(BranchStmt::Switch { arms }) => (0..*arms).map(EdgeKind::Case).collect(),
        };
        let mut expected_sorted = expected.clone();
        expected_sorted.sort();
        if sorted != expected_sorted {
            return Err(invalid(
                bpath,
                format!(
                    "branch edges {:?} do not match the declared branch (expected {:?})",
                    out.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
                    expected.iter().map(|k| k.to_string()).collect::<Vec<_>>()
                ),
            ));
        }
    }

    // Every block reachable from entry.
    let mut seen = BTreeSet::from([cfg.entry]);
    let mut queue = VecDeque::from([cfg.entry]);
    while let Some(b) = queue.pop_front() {
        for e in cfg.successors(b) {
            if seen.insert(e.to) {
                queue.push_back(e.to);
            }
        }
    }
    if let Some(dead) = ids.difference(&seen).next() {
        return Err(invalid(
            format!("{path}.blocks[{dead}]"),
            "block is unreachable from entry",
        ));
    }
    Ok(())
}
