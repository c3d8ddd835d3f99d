"""
Formula syntax for sum-of-products kernels.

    y ~ term (+ term)*
    term   := factor (* factor)*
    factor := gp(x) | zs(z) | cs(z) | cat(z) | bin(z: label, label, ...)

`gp` is the exponentiated quadratic kernel of a continuous covariate.
`zs` is the zero-sum kernel, `cs` compound symmetry (variance and rho come
from the categorical options), `cat` a custom matrix from the categorical
options and `bin` masks the listed categories out of the term.
"""

from dataclasses import dataclass
import re
from typing import List, Mapping, Optional, Tuple, Union

import numpy as np

from .covariates import Categorical, CovariateSpace
from .floatarray import FloatArray
from .kernelexpr import KernelExpr, KernelTerm
from .kernels import BIN, CS, EQ, ZS, CategoricalKernel, CustomCat
from .usererror import FormulaError, KernelSpecError


@dataclass(frozen=True)
class CSOptions:
    variance: float = 1.0
    rho: float = 0.0


CategoricalOption = Union[CSOptions, FloatArray]

FACTOR_PATTERN = re.compile(
    r'^\s*(?P<kind>[A-Za-z_]\w*)\s*\(\s*(?P<dim>[A-Za-z_][\w.]*)\s*'
    r'(?::(?P<labels>[^)]*))?\)\s*$')
NAME_PATTERN = re.compile(r'^\s*(?P<name>[A-Za-z_][\w.]*)\s*$')


def make_categorical(kind: str, dim: Categorical, labels: Optional[str],
                     options: Mapping[str, CategoricalOption]) \
        -> CategoricalKernel:
    option = options.get(dim.name)
    if kind == "zs":
        return ZS(dim.name, dim.num_categories)
    elif kind == "cs":
        if option is None:
            option = CSOptions()
        if not isinstance(option, CSOptions):
            raise FormulaError("Covariate %r has a custom matrix, not"
                               " cs() options.", dim.name)
        return CS(dim.name, dim.num_categories,
                  variance=option.variance, rho=option.rho)
    elif kind == "cat":
        if option is None or isinstance(option, CSOptions):
            raise FormulaError("Kernel cat(%s) needs a custom matrix.",
                               dim.name)
        return CustomCat(dim.name, np.asarray(option, dtype=float))
    elif kind == "bin":
        if labels is None or not labels.strip():
            raise FormulaError("Kernel bin(%s) needs masked categories,"
                               " as in bin(%s: a,b).", dim.name, dim.name)
        masked = frozenset(dim.code(label.strip())
                           for label in labels.split(","))
        return BIN(dim.name, dim.num_categories, masked)
    else:
        raise FormulaError("Unknown kernel %r.", kind)


def parse_term(text: str, space: CovariateSpace,
               options: Mapping[str, CategoricalOption]) -> KernelTerm:
    continuous: List[EQ] = []
    categorical: List[CategoricalKernel] = []
    for factor in text.split("*"):
        match = FACTOR_PATTERN.match(factor)
        if match is None:
            raise FormulaError("Cannot parse kernel factor %r.",
                               factor.strip())
        kind = match.group("kind")
        labels = match.group("labels")
        try:
            dim = space.get(match.group("dim"))
        except KernelSpecError as ex:
            raise FormulaError("%s", ex) from ex

        if kind != "bin" and labels is not None:
            raise FormulaError("Only bin() takes a category list, got %r.",
                               factor.strip())

        if kind == "gp":
            if isinstance(dim, Categorical):
                raise FormulaError("Kernel gp() needs a continuous covariate,"
                                   " but %r is categorical.", dim.name)
            continuous.append(EQ(dim.name))
        else:
            if not isinstance(dim, Categorical):
                raise FormulaError("Kernel %s() needs a categorical"
                                   " covariate, but %r is continuous.",
                                   kind, dim.name)
            try:
                categorical.append(
                    make_categorical(kind, dim, labels, options))
            except KernelSpecError as ex:
                raise FormulaError("%s", ex) from ex

    return KernelTerm(tuple(continuous), tuple(categorical))


def split_formula(text: str) -> Tuple[str, str]:
    if "~" not in text:
        raise FormulaError("Formula %r is missing '~'.", text)
    lhs, rhs = text.split("~", 1)
    match = NAME_PATTERN.match(lhs)
    if match is None:
        raise FormulaError("Formula response %r is not a name.", lhs.strip())
    if not rhs.strip():
        raise FormulaError("Formula %r has no terms.", text)
    return match.group("name"), rhs


def parse_formula(text: str, space: CovariateSpace,
                  options: Optional[Mapping[str, CategoricalOption]] = None) \
        -> KernelExpr:
    if not text.strip():
        raise FormulaError("Empty formula.")

    response, rhs = split_formula(text)
    terms = []
    for term_text in rhs.split("+"):
        if not term_text.strip():
            raise FormulaError("Formula %r has an empty term.", text)
        terms.append(parse_term(term_text, space, options or {}))

    try:
        return KernelExpr(space, tuple(terms), response)
    except KernelSpecError as ex:
        raise FormulaError("%s", ex) from ex
