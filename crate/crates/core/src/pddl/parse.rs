use std::collections::HashMap;

use super::sexpr::{read, Pos, Sexp};
use super::types::{flatten_types, ROOT_TYPE};
use super::{
    ActionSchema, Atom, Fact, ObjId, Param, PddlError, PredId, PredicateSchema, Problem, Term,
    TypeId, TypeTable,
};

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

/// Parses a typed STRIPS domain and problem into a [`Problem`].
pub fn parse(domain_text: &str, problem_text: &str) -> Result<Problem, PddlError> {
    let domain = read(domain_text)?;
    let problem = read(problem_text)?;
    let d = RawDomain::from_sexp(&domain)?;
    let p = RawProblem::from_sexp(&problem)?;
    build(d, p)
}

struct RawDomain<'a> {
    name: String,
    types: Vec<(String, String, Pos)>,
    constants: Vec<(String, String, Pos)>,
    predicates: Vec<(String, Vec<(String, String, Pos)>, Pos)>,
    actions: Vec<&'a Sexp>,
}

struct RawProblem<'a> {
    name: String,
    objects: Vec<(String, String, Pos)>,
    init: Option<&'a Sexp>,
    goal: Option<&'a Sexp>,
}

fn unsupported(e: &Sexp, what: impl Into<String>) -> PddlError {
    let p = e.pos();
    PddlError::Unsupported { line: p.line, col: p.col, what: what.into() }
}

fn semantic(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Semantic { line: pos.line, col: pos.col, msg: msg.into() }
}

/// Splits `(define (<kind> NAME) sections...)`.
fn define<'a>(e: &'a Sexp, kind: &str) -> Result<(String, &'a [Sexp]), PddlError> {
    let items = e.list().ok_or_else(|| e.error("expected `(define ...)`"))?;
    if items.first().and_then(Sexp::sym) != Some("define") {
        return Err(e.error("expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| e.error(format!("missing `({kind} NAME)`")))?;
    match header.list() {
        Some([k, name]) if k.sym() == Some(kind) => {
            let name = name.sym().ok_or_else(|| name.error("expected a name"))?;
            Ok((name.to_string(), &items[2..]))
        }
        _ => Err(header.error(format!("expected `({kind} NAME)`"))),
    }
}

fn check_requirements(section: &[Sexp]) -> Result<(), PddlError> {
    for r in section {
        let name = r.sym().ok_or_else(|| r.error("expected a requirement flag"))?;
        if !SUPPORTED_REQUIREMENTS.contains(&name) {
            return Err(PddlError::UnsupportedRequirement(name.to_string()));
        }
    }
    Ok(())
}

/// `a b - t c` becomes `[(a, t), (b, t), (c, object)]`.
fn typed_list(items: &[Sexp]) -> Result<Vec<(String, String, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        match item {
            Sexp::Sym(s, _) if s == "-" => {
                let ty = items
                    .get(i + 1)
                    .ok_or_else(|| item.error("missing type after `-`"))?;
                let ty = match ty {
                    Sexp::Sym(t, _) => t.clone(),
                    Sexp::List(..) => return Err(unsupported(ty, "either")),
                };
                if pending.is_empty() {
                    return Err(item.error("`-` without preceding names"));
                }
                out.extend(pending.drain(..).map(|(n, p)| (n, ty.clone(), p)));
                i += 2;
            }
            Sexp::Sym(s, p) => {
                pending.push((s.clone(), *p));
                i += 1;
            }
            Sexp::List(..) => return Err(item.error("expected a name")),
        }
    }
    out.extend(pending.into_iter().map(|(n, p)| (n, ROOT_TYPE.to_string(), p)));
    Ok(out)
}

impl<'a> RawDomain<'a> {
    fn from_sexp(e: &'a Sexp) -> Result<Self, PddlError> {
        let (name, sections) = define(e, "domain")?;
        let mut d = RawDomain {
            name,
            types: Vec::new(),
            constants: Vec::new(),
            predicates: Vec::new(),
            actions: Vec::new(),
        };
        for sec in sections {
            let items = sec.list().ok_or_else(|| sec.error("expected a section"))?;
            let rest = &items[1..];
            match sec.head() {
                Some(":requirements") => check_requirements(rest)?,
                Some(":types") => d.types.extend(typed_list(rest)?),
                Some(":constants") => d.constants.extend(typed_list(rest)?),
                Some(":predicates") => {
                    for p in rest {
                        let parts = p.list().ok_or_else(|| p.error("expected a predicate"))?;
                        let pname = parts
                            .first()
                            .and_then(Sexp::sym)
                            .ok_or_else(|| p.error("expected a predicate name"))?;
                        d.predicates
                            .push((pname.to_string(), typed_list(&parts[1..])?, p.pos()));
                    }
                }
                Some(":action") => d.actions.push(sec),
                Some(other) => return Err(unsupported(sec, other)),
                None => return Err(sec.error("expected a section keyword")),
            }
        }
        Ok(d)
    }
}

impl<'a> RawProblem<'a> {
    fn from_sexp(e: &'a Sexp) -> Result<Self, PddlError> {
        let (name, sections) = define(e, "problem")?;
        let mut p = RawProblem { name, objects: Vec::new(), init: None, goal: None };
        for sec in sections {
            let items = sec.list().ok_or_else(|| sec.error("expected a section"))?;
            match sec.head() {
                Some(":domain") => {}
                Some(":requirements") => check_requirements(&items[1..])?,
                Some(":objects") => p.objects.extend(typed_list(&items[1..])?),
                Some(":init") => p.init = Some(sec),
                Some(":goal") => p.goal = Some(sec),
                Some(other) => return Err(unsupported(sec, other)),
                None => return Err(sec.error("expected a section keyword")),
            }
        }
        Ok(p)
    }
}

struct Scope<'s> {
    types: &'s TypeTable,
    objects: &'s HashMap<String, ObjId>,
    object_types: &'s [TypeId],
    predicates: &'s HashMap<String, PredId>,
    schemas: &'s [PredicateSchema],
}

impl Scope<'_> {
    fn type_id(&self, name: &str, pos: Pos) -> Result<TypeId, PddlError> {
        self.types
            .id(name)
            .ok_or_else(|| semantic(pos, format!("undeclared type `{name}`")))
    }

    /// Resolves `(pred args...)`; `params` maps variable names to
    /// `(index, type)` and is empty for ground atoms.
    fn atom(&self, e: &Sexp, params: &[Param]) -> Result<Atom, PddlError> {
        let items = e.list().ok_or_else(|| e.error("expected an atom"))?;
        let head = items
            .first()
            .and_then(Sexp::sym)
            .ok_or_else(|| e.error("expected a predicate name"))?;
        match head {
            "=" => return Err(unsupported(e, "=")),
            "not" | "or" | "imply" | "forall" | "exists" | "when" | "increase" | "decrease" => {
                return Err(unsupported(e, head))
            }
            _ => {}
        }
        let pred = *self
            .predicates
            .get(head)
            .ok_or_else(|| semantic(e.pos(), format!("undeclared predicate `{head}`")))?;
        let schema = &self.schemas[pred.index()];
        let args = &items[1..];
        if args.len() != schema.arity() {
            return Err(semantic(
                e.pos(),
                format!("`{head}` expects {} arguments, got {}", schema.arity(), args.len()),
            ));
        }
        let mut terms = Vec::with_capacity(args.len());
        for (arg, &expected) in args.iter().zip(&schema.param_types) {
            let name = arg.sym().ok_or_else(|| arg.error("expected a variable or object"))?;
            let term = if name.starts_with('?') {
                let idx = params
                    .iter()
                    .position(|p| p.name == name)
                    .ok_or_else(|| semantic(arg.pos(), format!("undeclared parameter `{name}`")))?;
                if !self.types.is_subtype(params[idx].ty, expected)
                    && !self.types.members_within(params[idx].ty, expected)
                {
                    return Err(semantic(
                        arg.pos(),
                        format!(
                            "parameter `{name}` of type `{}` does not fit `{}` argument of type `{}`",
                            self.types.name(params[idx].ty),
                            head,
                            self.types.name(expected)
                        ),
                    ));
                }
                Term::Param(idx)
            } else {
                let o = *self
                    .objects
                    .get(name)
                    .ok_or_else(|| semantic(arg.pos(), format!("undeclared object `{name}`")))?;
                if !self.types.contains(expected, o) {
                    return Err(semantic(
                        arg.pos(),
                        format!(
                            "object `{name}` of type `{}` does not fit `{}` argument of type `{}`",
                            self.types.name(self.object_types[o.index()]),
                            head,
                            self.types.name(expected)
                        ),
                    ));
                }
                Term::Obj(o)
            };
            terms.push(term);
        }
        Ok(Atom { pred, args: terms })
    }

    /// A conjunction of positive atoms: `(and ...)`, a single atom, or `()`.
    fn conjunction(&self, e: &Sexp, params: &[Param]) -> Result<Vec<Atom>, PddlError> {
        match e.list() {
            Some([]) => Ok(Vec::new()),
            Some(items) if e.head() == Some("and") => items[1..]
                .iter()
                .map(|x| self.conjunction(x, params))
                .collect::<Result<Vec<_>, _>>()
                .map(|v| v.into_iter().flatten().collect()),
            Some(_) if e.head() == Some("not") => Err(unsupported(e, "negative precondition")),
            Some(_) => Ok(vec![self.atom(e, params)?]),
            None => Err(e.error("expected a condition")),
        }
    }

    fn effects(
        &self,
        e: &Sexp,
        params: &[Param],
        add: &mut Vec<Atom>,
        del: &mut Vec<Atom>,
    ) -> Result<(), PddlError> {
        match e.list() {
            Some([]) => Ok(()),
            Some(items) if e.head() == Some("and") => {
                for x in &items[1..] {
                    self.effects(x, params, add, del)?;
                }
                Ok(())
            }
            Some([_, inner]) if e.head() == Some("not") => {
                del.push(self.atom(inner, params)?);
                Ok(())
            }
            Some(_) if matches!(e.head(), Some("forall") | Some("when")) => {
                Err(unsupported(e, "conditional effect"))
            }
            Some(_) => {
                add.push(self.atom(e, params)?);
                Ok(())
            }
            None => Err(e.error("expected an effect")),
        }
    }

    fn action(&self, e: &Sexp) -> Result<ActionSchema, PddlError> {
        let items = e.list().unwrap();
        let name = items
            .get(1)
            .and_then(Sexp::sym)
            .ok_or_else(|| e.error("expected an action name"))?
            .to_string();
        let mut params = Vec::new();
        let mut prec = Vec::new();
        let mut add = Vec::new();
        let mut del = Vec::new();
        let mut i = 2;
        while i < items.len() {
            let key = &items[i];
            let val = items
                .get(i + 1)
                .ok_or_else(|| key.error("missing value after keyword"))?;
            match key.sym() {
                Some(":parameters") => {
                    let list = val.list().ok_or_else(|| val.error("expected a parameter list"))?;
                    for (pname, ty, pos) in typed_list(list)? {
                        if !pname.starts_with('?') {
                            return Err(semantic(pos, format!("parameter `{pname}` must start with `?`")));
                        }
                        if params.iter().any(|p: &Param| p.name == pname) {
                            return Err(semantic(pos, format!("duplicate parameter `{pname}`")));
                        }
                        params.push(Param { name: pname, ty: self.type_id(&ty, pos)? });
                    }
                }
                Some(":precondition") => prec = self.conjunction(val, &params)?,
                Some(":effect") => self.effects(val, &params, &mut add, &mut del)?,
                _ => return Err(key.error("expected :parameters, :precondition or :effect")),
            }
            i += 2;
        }
        dedup_keep_order(&mut prec);
        dedup_keep_order(&mut add);
        dedup_keep_order(&mut del);
        Ok(ActionSchema { name, params, prec, add, del })
    }

    fn ground(&self, e: &Sexp) -> Result<Fact, PddlError> {
        let atom = self.atom(e, &[])?;
        let args = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Obj(o) => *o,
                Term::Param(_) => unreachable!("no parameters in scope"),
            })
            .collect();
        Ok(Fact::new(atom.pred, args))
    }
}

fn dedup_keep_order(atoms: &mut Vec<Atom>) {
    let mut seen = std::collections::HashSet::new();
    atoms.retain(|a| seen.insert(a.clone()));
}

fn build(d: RawDomain<'_>, p: RawProblem<'_>) -> Result<Problem, PddlError> {
    let type_decls: Vec<(String, String)> =
        d.types.iter().map(|(n, t, _)| (n.clone(), t.clone())).collect();

    let mut all_objects: Vec<(String, String, bool)> = Vec::new();
    let mut positions: HashMap<String, Pos> = HashMap::new();
    for (list, constant) in [(&d.constants, true), (&p.objects, false)] {
        for (name, ty, pos) in list.iter() {
            if positions.insert(name.clone(), *pos).is_some() {
                return Err(semantic(*pos, format!("object `{name}` declared twice")));
            }
            all_objects.push((name.clone(), ty.clone(), constant));
        }
    }

    // Validate object types up front so errors carry positions.
    let declared: std::collections::HashSet<&str> = std::iter::once(ROOT_TYPE)
        .chain(d.types.iter().flat_map(|(n, t, _)| [n.as_str(), t.as_str()]))
        .collect();
    for (name, ty, pos) in d.constants.iter().chain(&p.objects) {
        if !declared.contains(ty.as_str()) {
            return Err(semantic(*pos, format!("object `{name}` has undeclared type `{ty}`")));
        }
    }

    let (types, objects) = flatten_types(&type_decls, &all_objects)?;
    let object_index: HashMap<String, ObjId> =
        objects.iter().map(|o| (o.name.clone(), o.index)).collect();
    let object_types: Vec<TypeId> = objects.iter().map(|o| o.ty).collect();

    let mut predicates = Vec::new();
    let mut pred_index = HashMap::new();
    for (name, params, pos) in &d.predicates {
        if pred_index.contains_key(name) {
            return Err(semantic(*pos, format!("predicate `{name}` declared twice")));
        }
        let param_types = params
            .iter()
            .map(|(_, ty, ppos)| {
                types
                    .id(ty)
                    .ok_or_else(|| semantic(*ppos, format!("undeclared type `{ty}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        pred_index.insert(name.clone(), PredId(predicates.len() as u32));
        predicates.push(PredicateSchema { name: name.clone(), param_types, is_static: true });
    }

    let scope = Scope {
        types: &types,
        objects: &object_index,
        object_types: &object_types,
        predicates: &pred_index,
        schemas: &predicates,
    };

    let mut actions = Vec::new();
    for a in &d.actions {
        let schema = scope.action(a)?;
        if actions.iter().any(|x: &ActionSchema| x.name == schema.name) {
            return Err(semantic(a.pos(), format!("action `{}` declared twice", schema.name)));
        }
        actions.push(schema);
    }

    let mut init = Vec::new();
    if let Some(sec) = p.init {
        for item in &sec.list().unwrap()[1..] {
            init.push(scope.ground(item)?);
        }
    }
    init.sort();
    init.dedup();

    let mut goal = match p.goal {
        Some(sec) => {
            let items = sec.list().unwrap();
            match items.len() {
                1 => Vec::new(),
                2 => scope
                    .conjunction(&items[1], &[])?
                    .into_iter()
                    .map(|a| {
                        Fact::new(
                            a.pred,
                            a.args
                                .iter()
                                .map(|t| match t {
                                    Term::Obj(o) => *o,
                                    Term::Param(_) => unreachable!(),
                                })
                                .collect(),
                        )
                    })
                    .collect(),
                _ => return Err(sec.error("expected a single goal condition")),
            }
        }
        None => Vec::new(),
    };
    goal.sort();
    goal.dedup();

    for a in &actions {
        for atom in a.add.iter().chain(&a.del) {
            predicates[atom.pred.index()].is_static = false;
        }
    }

    Ok(Problem {
        domain_name: d.name,
        name: p.name,
        types,
        objects,
        predicates,
        actions,
        init,
        goal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::Polarity;

    pub(crate) const TRANSPORT: &str = "
(define (domain transport)
  (:requirements :strips :typing)
  (:types location locatable - object vehicle package - locatable)
  (:predicates (road ?l1 ?l2 - location) (at ?x - locatable ?l - location)
               (in ?p - package ?v - vehicle))
  (:action drive :parameters (?v - vehicle ?l1 ?l2 - location)
    :precondition (and (at ?v ?l1) (road ?l1 ?l2))
    :effect (and (not (at ?v ?l1)) (at ?v ?l2)))
  (:action drop :parameters (?v - vehicle ?l - location ?p - package)
    :precondition (and (at ?v ?l) (in ?p ?v))
    :effect (and (not (in ?p ?v)) (at ?p ?l)))
  (:action pickup :parameters (?v - vehicle ?l - location ?p - package)
    :precondition (and (at ?v ?l) (at ?p ?l))
    :effect (and (not (at ?p ?l)) (in ?p ?v))))";

    const TINY: &str = "
(define (problem tiny) (:domain transport)
  (:objects v - vehicle p - package l - location)
  (:init (at v l) (in p v))
  (:goal (and (at p l))))";

    #[test]
    fn parses_three_object_transport() {
        let p = parse(TRANSPORT, TINY).unwrap();
        assert_eq!(p.actions.len(), 3);
        assert_eq!(p.objects.len(), 3);
        assert_eq!(p.init.len(), 2);
        assert_eq!(p.goal, vec![p.fact("at", &["p", "l"])]);
        assert!(p.predicate(p.predicate_id("road").unwrap()).is_static);
        assert!(!p.predicate(p.predicate_id("at").unwrap()).is_static);
        let drop = p.action(p.action_id("drop").unwrap());
        assert_eq!(drop.effects(Polarity::Del).len(), 1);
    }

    #[test]
    fn empty_goal_is_vacuous() {
        let prob = "(define (problem e) (:domain transport)
            (:objects v - vehicle l - location) (:init (at v l)) (:goal (and)))";
        assert!(parse(TRANSPORT, prob).unwrap().goal.is_empty());
    }

    #[test]
    fn rejects_conditional_effects_requirement() {
        let dom = TRANSPORT.replace(":strips :typing", ":strips :typing :conditional-effects");
        assert_eq!(
            parse(&dom, TINY).unwrap_err(),
            PddlError::UnsupportedRequirement(":conditional-effects".into())
        );
    }

    #[test]
    fn rejects_equality_and_negation() {
        let dom = TRANSPORT.replace("(road ?l1 ?l2))", "(road ?l1 ?l2) (= ?l1 ?l2))");
        assert!(matches!(parse(&dom, TINY), Err(PddlError::Unsupported { what, .. }) if what == "="));
        let dom = TRANSPORT.replace("(road ?l1 ?l2))", "(road ?l1 ?l2) (not (at ?v ?l2)))");
        assert!(matches!(parse(&dom, TINY), Err(PddlError::Unsupported { .. })));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse(TRANSPORT, "(define (problem x)\n  (:objects a").unwrap_err();
        assert!(matches!(err, PddlError::Syntax { line: 2, col: 3, .. }), "{err:?}");
    }

    #[test]
    fn undeclared_names_are_reported() {
        let prob = TINY.replace("(in p v)", "(in q v)");
        assert!(matches!(parse(TRANSPORT, &prob), Err(PddlError::Semantic { .. })));
    }

    #[test]
    fn duplicate_init_facts_collapse() {
        let prob = TINY.replace("(in p v)", "(in p v) (in p v)");
        assert_eq!(parse(TRANSPORT, &prob).unwrap().init.len(), 2);
    }

    #[test]
    fn constants_join_the_object_list() {
        let dom = TRANSPORT.replace(
            "(:predicates",
            "(:constants depot - location)\n  (:predicates",
        );
        let p = parse(&dom, TINY).unwrap();
        let depot = p.object(p.object_id("depot").unwrap());
        assert!(depot.constant);
        let loc = p.types.id("location").unwrap();
        assert!(p.types.contains(loc, depot.index));
        assert_eq!(p.types.size(loc), 2);
    }
}
