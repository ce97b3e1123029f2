use std::collections::HashMap;
use std::ops::Range;

use super::{ObjId, Object, PddlError, TypeId};

pub const ROOT_TYPE: &str = "object";

/// Flattened type tree. Type 0 is always the root `object`.
///
/// Members of a type are the objects declared with that type or any of its
/// subtypes; they occupy the index range `ranges[t]` of the global ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeTable {
    names: Vec<String>,
    parents: Vec<Option<TypeId>>,
    children: Vec<Vec<TypeId>>,
    ranges: Vec<(u32, u32)>,
}

impl TypeTable {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> TypeId {
        TypeId(0)
    }

    pub fn ids(&self) -> impl Iterator<Item = TypeId> {
        (0..self.names.len() as u32).map(TypeId)
    }

    pub fn name(&self, t: TypeId) -> &str {
        &self.names[t.index()]
    }

    pub fn id(&self, name: &str) -> Option<TypeId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| TypeId(i as u32))
    }

    pub fn parent(&self, t: TypeId) -> Option<TypeId> {
        self.parents[t.index()]
    }

    pub fn children(&self, t: TypeId) -> &[TypeId] {
        &self.children[t.index()]
    }

    /// Member objects as a contiguous range of object indices.
    pub fn members(&self, t: TypeId) -> Range<u32> {
        let (lo, hi) = self.ranges[t.index()];
        lo..hi
    }

    pub fn member_ids(&self, t: TypeId) -> impl Iterator<Item = ObjId> {
        self.members(t).map(ObjId)
    }

    pub fn size(&self, t: TypeId) -> usize {
        let (lo, hi) = self.ranges[t.index()];
        (hi - lo) as usize
    }

    pub fn contains(&self, t: TypeId, o: ObjId) -> bool {
        self.members(t).contains(&o.0)
    }

    /// `sub` equals `sup` or lies below it in the tree.
    pub fn is_subtype(&self, sub: TypeId, sup: TypeId) -> bool {
        let mut cur = Some(sub);
        while let Some(t) = cur {
            if t == sup {
                return true;
            }
            cur = self.parents[t.index()];
        }
        false
    }

    /// True when the two types share at least one object.
    pub fn overlaps(&self, a: TypeId, b: TypeId) -> bool {
        let (alo, ahi) = self.ranges[a.index()];
        let (blo, bhi) = self.ranges[b.index()];
        alo.max(blo) < ahi.min(bhi)
    }

    /// Members of `a` are all members of `b`.
    pub fn members_within(&self, a: TypeId, b: TypeId) -> bool {
        let (alo, ahi) = self.ranges[a.index()];
        let (blo, bhi) = self.ranges[b.index()];
        alo == ahi || (blo <= alo && ahi <= bhi)
    }

    /// The more specific of two types on the same branch of the tree.
    pub fn meet(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        if self.is_subtype(a, b) {
            Some(a)
        } else if self.is_subtype(b, a) {
            Some(b)
        } else {
            None
        }
    }

    /// `t` and all of its descendants, pre-order.
    pub fn subtree(&self, t: TypeId) -> Vec<TypeId> {
        let mut out = vec![t];
        let mut i = 0;
        while i < out.len() {
            let cur = out[i];
            out.extend(self.children[cur.index()].iter().copied());
            i += 1;
        }
        out
    }
}

/// Builds the type tree and the global object ordering.
///
/// `types` holds `(name, parent)` declarations, `objects` holds
/// `(name, type, is_constant)` in declaration order. Objects are laid out
/// depth-first over the tree, each type's own objects before those of its
/// subtypes, so every type covers one contiguous index range.
pub fn flatten_types(
    types: &[(String, String)],
    objects: &[(String, String, bool)],
) -> Result<(TypeTable, Vec<Object>), PddlError> {
    let mut names = vec![ROOT_TYPE.to_string()];
    let mut index: HashMap<String, usize> = HashMap::from([(ROOT_TYPE.to_string(), 0)]);
    let mut declared_parent: Vec<Option<usize>> = vec![None];

    let mut intern = |name: &str, names: &mut Vec<String>, parents: &mut Vec<Option<usize>>| {
        *index.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            parents.push(None);
            names.len() - 1
        })
    };

    for (name, parent) in types {
        let t = intern(name, &mut names, &mut declared_parent);
        let p = intern(parent, &mut names, &mut declared_parent);
        if t == 0 {
            if p != 0 {
                return Err(PddlError::NonTreeHierarchy(format!(
                    "root type `{ROOT_TYPE}` declared with parent `{parent}`"
                )));
            }
            continue;
        }
        if t == p {
            return Err(PddlError::NonTreeHierarchy(format!(
                "type `{name}` is declared as its own parent"
            )));
        }
        match declared_parent[t] {
            Some(old) if old != p => {
                return Err(PddlError::NonTreeHierarchy(format!(
                    "type `{name}` has two parents `{}` and `{parent}`",
                    names[old]
                )))
            }
            _ => declared_parent[t] = Some(p),
        }
    }

    let n = names.len();
    let parents: Vec<Option<usize>> = (0..n)
        .map(|t| if t == 0 { None } else { Some(declared_parent[t].unwrap_or(0)) })
        .collect();

    for start in 1..n {
        let mut cur = start;
        let mut steps = 0;
        while cur != 0 {
            cur = parents[cur].expect("non-root types have a parent");
            steps += 1;
            if steps > n {
                return Err(PddlError::NonTreeHierarchy(format!(
                    "type `{}` is its own ancestor",
                    names[start]
                )));
            }
        }
    }

    let mut children = vec![Vec::new(); n];
    for t in 1..n {
        children[parents[t].unwrap()].push(TypeId(t as u32));
    }

    let mut own: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (name, ty, _)) in objects.iter().enumerate() {
        let t = *names
            .iter()
            .position(|x| x == ty)
            .as_ref()
            .ok_or_else(|| PddlError::Semantic {
                line: 0,
                col: 0,
                msg: format!("object `{name}` has undeclared type `{ty}`"),
            })?;
        own[t].push(i);
    }

    let mut order = Vec::with_capacity(objects.len());
    let mut ranges = vec![(0u32, 0u32); n];
    fn visit(
        t: usize,
        children: &[Vec<TypeId>],
        own: &[Vec<usize>],
        order: &mut Vec<usize>,
        ranges: &mut [(u32, u32)],
    ) {
        let lo = order.len() as u32;
        order.extend(own[t].iter().copied());
        for c in &children[t] {
            visit(c.index(), children, own, order, ranges);
        }
        ranges[t] = (lo, order.len() as u32);
    }
    visit(0, &children, &own, &mut order, &mut ranges);

    let objs = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let (name, ty, constant) = &objects[i];
            Object {
                name: name.clone(),
                index: ObjId(pos as u32),
                ty: TypeId(names.iter().position(|x| x == ty).unwrap() as u32),
                constant: *constant,
            }
        })
        .collect();

    Ok((
        TypeTable {
            names,
            parents: parents.into_iter().map(|p| p.map(|x| TypeId(x as u32))).collect(),
            children,
            ranges,
        },
        objs,
    ))
}
