//! Machine-readable description of every catalog id and its parameters.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamDoc {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub default: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub lhs: &'static str,
    /// `"yes"`, `"no"`, or `"by form"`.
    pub constant_known: &'static str,
    pub min_dim: usize,
    pub params: &'static [ParamDoc],
}

const fn param(name: &'static str, kind: &'static str, default: &'static str, description: &'static str) -> ParamDoc {
    ParamDoc { name, kind, default, description }
}

const MEASURE: ParamDoc = param("measure", "measure", "gaussian", "reference measure");
const BODY_BALL: ParamDoc = param("body", "body", "ball of radius 1", "convex body carrying the uniform measure");
const BODY_SIMPLEX: ParamDoc = param("body", "body", "simplex of scale 1", "orthant-unconditional convex body");

static CATALOG: [CatalogEntry; 22] = [
    CatalogEntry {
        id: "classical_bl",
        summary: "Var f <= int <(D^2 V)^-1 grad f, grad f>",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[MEASURE],
    },
    CatalogEntry {
        id: "generalized_bl",
        summary: "Var f <= int Ric_{g,mu}^-1(df, df) for a Euclidean or product metric",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[MEASURE, param("metric", "metric", "euclidean", "euclidean | product_power{p} | product_exp{lambda}")],
    },
    CatalogEntry {
        id: "refined_bl",
        summary: "Var f <= 2 int <Q^-1 grad f, grad f> with Q built from the monotone map onto a target",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("measure", "measure", "product of standard Gaussians", "product source measure exp(-V)"),
            param("target", "measure", "uniform on [-1, 1]", "one-dimensional target law exp(-W), applied per coordinate"),
        ],
    },
    CatalogEntry {
        id: "negdim_bl",
        summary: "Var f <= 2 int <(D^2 V + grad V grad V^T / 2d)^-1 grad f, grad f>",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[MEASURE],
    },
    CatalogEntry {
        id: "compact_bl",
        summary: "Var f <= 2 int <(Id/(2R^2) + D^2 W)^-1 grad f, grad f> for supp in B_R, barycenter 0",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("measure", "measure", "uniform on the ball of radius 1/2", "log-concave measure exp(-W)"),
            param("radius", "number", "support radius of the measure", "R"),
        ],
    },
    CatalogEntry {
        id: "payne_weinberger",
        summary: "Var f <= 2 R^2 int |grad f|^2 for supp in B_R",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("measure", "measure", "uniform on the ball of radius 1/2", "log-concave measure"),
            param("radius", "number", "support radius of the measure", "R"),
        ],
    },
    CatalogEntry {
        id: "bakry_emery_lsi",
        summary: "Ent f^2 <= (2/rho) int |grad f|^2 when D^2 V >= rho",
        lhs: "entropy_of_square",
        constant_known: "yes",
        min_dim: 1,
        params: &[MEASURE, param("rho", "number", "grid minimum of the Hessian", "curvature lower bound")],
    },
    CatalogEntry {
        id: "entropic_bl",
        summary: "Ent f^2 <= (2/rho) int sum f_i^2 / V''(x_i), rho from the Legendre criterion",
        lhs: "entropy_of_square",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("measure", "measure", "product of standard Gaussians", "product measure"),
            param("rho", "number", "largest rho passing the criterion", "entropic curvature"),
        ],
    },
    CatalogEntry {
        id: "muq_lsi",
        summary: "Ent f^2 <= 4/(c q^2) int sum x_i^(2-q) f_i^2 under exp(-c sum x_i^q) on the orthant",
        lhs: "entropy_of_square",
        constant_known: "yes",
        min_dim: 1,
        params: &[param("q", "number", "1.5", "exponent in (1, 2]"), param("c", "number", "1", "scale")],
    },
    CatalogEntry {
        id: "bakry_t_lsi",
        summary: "log-Sobolev inequality after the substitution t = x^q",
        lhs: "entropy_of_square",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("q", "number", "1.5", "exponent in [1, 2]"),
            param("c", "number", "1", "scale"),
            param("form", "string", "literal", "literal: Exp(c), weight t^(1/q), 4/(cq); pushforward: Gamma(1/q, c), weight t, 4/c"),
        ],
    },
    CatalogEntry {
        id: "qgt2_lsi",
        summary: "Ent f^2 <= C int sum min(1, x_i^(2-q)) f_i^2 for q > 2",
        lhs: "entropy_of_square",
        constant_known: "by form",
        min_dim: 1,
        params: &[
            param("q", "number", "3", "exponent > 2"),
            param("form", "string", "modified", "modified: capped power potential with C = 2/rho_q; power: exp(-x^q), C unknown"),
        ],
    },
    CatalogEntry {
        id: "poly_product",
        summary: "consequences of the x^(-2p) product metric on the orthant",
        lhs: "variance (parts 1-3), entropy_of_square (parts 4-5)",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("measure", "measure", "exp(-sum x_i) on the orthant", "orthant measure"),
            param("part", "integer", "2", "1: Ric^-1; 2: 4 x_i^2; 3: x_i/lambda; 4: LSI on [0,R]^d; 5: LSI with V_i >= lambda"),
            param("p", "number", "0.5", "metric exponent"),
            param("lambda", "number", "1", "gradient lower bound (parts 3, 5)"),
            param("radius", "number", "upper coordinate bound", "R (part 4)"),
        ],
    },
    CatalogEntry {
        id: "exp_product",
        summary: "Var f <= int sum f_i^2 / (lambda_i (V_i - lambda_i)), or 4/lambda^2 int |grad f|^2",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[
            param("measure", "measure", "simplex_radial{lambda 1, kappa 0.5}", "log-concave measure"),
            param("form", "string", "corollary", "corollary | general"),
            param("lambda", "number", "linear rate of the measure", "lower bound of V_i"),
            param("lambdas", "number[]", "lambda in every coordinate", "per-coordinate parameters (general form)"),
        ],
    },
    CatalogEntry {
        id: "klartag_transfer",
        summary: "Var f <= 4 int sum x_i^2 f_i^2 + max_i int x_i^2 * int |grad f|^2 for unconditional measures",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 1,
        params: &[param("measure", "measure", "exp(-sum |x_i|)", "unconditional log-concave measure")],
    },
    CatalogEntry {
        id: "cone_variance",
        summary: "Var_sigma h <= 4/(lambda^2 (d-1)(d-2)) int |y|^2/<y,n>^2 dsigma for 1-Lipschitz h",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 3,
        params: &[BODY_SIMPLEX, param("lambda", "number", "min of n_i/<n,y> over the boundary", "diagonality constant")],
    },
    CatalogEntry {
        id: "l1_type",
        summary: "Poincare bound with an unspecified numeric constant on orthant-unconditional bodies",
        lhs: "variance",
        constant_known: "no",
        min_dim: 1,
        params: &[BODY_SIMPLEX, param("form", "string", "general", "general | diagonal")],
    },
    CatalogEntry {
        id: "dim_bl_boundary",
        summary: "N/(N-1) Var f <= int Ric_{g,mu,N}^-1(df, df) + boundary term, radial conformal metric",
        lhs: "variance (parts 1-2), l2_dirichlet (part 3)",
        constant_known: "yes",
        min_dim: 2,
        params: &[
            BODY_BALL,
            param("part", "integer", "1", "1: mean-convex boundary term; 2: locally convex; 3: Dirichlet"),
            param("n", "number | \"inf\"", "-d", "dimension parameter"),
            param("theta", "number", "-(d-N)/(2N)", "radial exponent"),
            param("eps", "number", "1e-6 R^2", "regularization of log |x|^2"),
        ],
    },
    CatalogEntry {
        id: "hardy_boundary",
        summary: "Var f/(1-N) <= 4/(d(d-N)) int |x|^2 |grad f|^2 + int (f-C)^2 / ((d-N)/2 <y,n>/|y|^2 - N H_0)",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 6,
        params: &[BODY_BALL, param("n", "number", "-d", "dimension parameter N <= 0")],
    },
    CatalogEntry {
        id: "hardy_dirichlet",
        summary: "int f^2 <= 4/d^2 int |x|^2 |grad f|^2 for f vanishing on the boundary",
        lhs: "l2_dirichlet",
        constant_known: "yes",
        min_dim: 1,
        params: &[BODY_BALL],
    },
    CatalogEntry {
        id: "hardy_n0",
        summary: "Var f <= 4/d^2 int |x|^2 |grad f|^2 + int (f-C)^2 2|y|^2/(d <y,n>)",
        lhs: "variance",
        constant_known: "yes",
        min_dim: 6,
        params: &[BODY_BALL],
    },
    CatalogEntry {
        id: "strong_boundary",
        summary: "II >= theta <y,n>/|y|^2: Var f <= 2/(d theta) int |x|^2 |grad f|^2 and its entropy form",
        lhs: "variance or entropy_of_square",
        constant_known: "yes",
        min_dim: 8,
        params: &[BODY_BALL, param("theta", "number", "0.5", "convexity exponent in (0, 1/2]"), param("form", "string", "variance", "variance | entropy")],
    },
    CatalogEntry {
        id: "one_lip_reduction",
        summary: "Poincare constant against the largest variance of 1-Lipschitz functions",
        lhs: "variance",
        constant_known: "no",
        min_dim: 1,
        params: &[BODY_SIMPLEX],
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

pub fn manifest_json() -> serde_json::Value {
    serde_json::json!({ "format": 1, "inequalities": CATALOG })
}
