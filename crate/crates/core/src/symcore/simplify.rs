use super::{Binary, Expr, Node, Unary};

impl Expr {
    /// Constant folding, 0/1 identities and `--e → e`, applied bottom-up.
    ///
    /// This is not a canonical form: two simplified trees can differ
    /// structurally and still be equal as functions.
    pub fn simplify(&self) -> Expr {
        self.rewrite(&mut |n| match n {
            // a + (-1)*b style leftovers from raw construction
            Node::Binary(Binary::Mul, a, b) if a.is_const(-1.0) || b.is_const(-1.0) => {
                let other = if a.is_const(-1.0) { b } else { a };
                Some(-other.simplify())
            }
            Node::Unary(Unary::Neg, a) => match a.node() {
                Node::Unary(Unary::Neg, inner) => Some(inner.simplify()),
                _ => None,
            },
            _ => None,
        })
    }
}
