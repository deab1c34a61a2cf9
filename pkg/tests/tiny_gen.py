"""Seeded generator of tiny contracts and properties for prover cross-checks.

Every generated contract stays inside a small fragment: one to three
uint256 state variables, one or two functions with at most two uint256
parameters, straight-line bodies with assignments, branches, requires,
and literal-bound for-loops of at most three iterations. Every generated
property constrains all state variables and parameters below 8, so an
exhaustive check over 0..7 covers the full scenario space the property
admits.
"""

from __future__ import annotations

import random

MAX_DOMAIN = 8


class TinyGen:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.nvars = self.rng.randint(1, 3)
        self.vars = [f"v{i}" for i in range(self.nvars)]
        self.funcs: list[tuple[str, list[str]]] = []
        self._loop_counter = 0

    # -- expression grammar ----------------------------------------------------

    def atom(self, names):
        r = self.rng.random()
        if r < 0.5 and names:
            return self.rng.choice(names)
        return str(self.rng.randint(0, 3))

    def arith(self, names, depth=2, div=True):
        if depth == 0 or self.rng.random() < 0.4:
            return self.atom(names)
        ops = ["+", "+", "-", "*"] + (["/"] if div else [])
        op = self.rng.choice(ops)
        left = self.arith(names, depth - 1, div)
        if op == "/":
            return f"{left} / {self.rng.randint(2, 3)}"
        right = self.arith(names, depth - 1, div)
        return f"{left} {op} {right}"

    def comparison(self, names, div=True):
        op = self.rng.choice(["<", "<=", ">", ">=", "==", "!="])
        return f"{self.arith(names, div=div)} {op} {self.arith(names, div=div)}"

    def condition(self, names, depth=1, div=True):
        r = self.rng.random()
        if depth == 0 or r < 0.6:
            return self.comparison(names, div)
        if r < 0.8:
            join = self.rng.choice(["&&", "||"])
            return f"({self.condition(names, 0, div)}) {join} ({self.condition(names, 0, div)})"
        return f"!({self.condition(names, 0, div)})"

    # -- contract body ----------------------------------------------------------

    def statement(self, names):
        kind = self.rng.random()
        target = self.rng.choice(self.vars)
        if kind < 0.45:
            return [f"        {target} = {self.arith(names)};"]
        if kind < 0.70:
            other = self.rng.choice(self.vars)
            return [
                f"        if ({self.condition(names)}) {{",
                f"            {target} = {self.arith(names)};",
                "        } else {",
                f"            {other} = {self.arith(names)};",
                "        }",
            ]
        if kind < 0.85:
            return [f'        require({self.condition(names)}, "guard");']
        self._loop_counter += 1
        i = f"i{self._loop_counter}"
        trips = self.rng.randint(1, 3)
        step = self.rng.randint(1, 2)
        return [
            f"        for (uint256 {i} = 0; {i} < {trips}; {i} = {i} + 1) {{",
            f"            {target} = {target} + {step};",
            "        }",
        ]

    def function(self, index):
        nparams = self.rng.randint(0, 2)
        params = [f"p{j}" for j in range(nparams)]
        name = f"f{index}"
        self.funcs.append((name, params))
        names = self.vars + params
        sig = ", ".join(f"uint256 {p}" for p in params)
        lines = [f"    function {name}({sig}) public {{"]
        for _ in range(self.rng.randint(1, 4)):
            lines.extend(self.statement(names))
        lines.append("    }")
        return lines

    def contract(self):
        lines = ["contract Tiny {"]
        for v in self.vars:
            lines.append(f"    uint256 public {v};")
        lines.append("")
        nfuncs = self.rng.randint(1, 2)
        for i in range(nfuncs):
            lines.extend(self.function(i))
        lines.append("}")
        return "\n".join(lines) + "\n"

    # -- properties --------------------------------------------------------------

    def fspec(self):
        name, params = self.rng.choice(self.funcs)
        names = self.vars + params
        pre = [f"{n} < {MAX_DOMAIN};" for n in names]
        if self.rng.random() < 0.5:
            pre.append(f"{self.condition(names, div=False)};")
        post_names = names + [f"old({v})" for v in self.vars]
        post = [
            f"{self.comparison(post_names, div=False)};"
            for _ in range(self.rng.randint(1, 2))
        ]
        lines = [f"function {name} {{", "    precondition {"]
        lines.extend(f"        {p}" for p in pre)
        lines.append("    }")
        lines.append("    postcondition {")
        lines.extend(f"        {q}" for q in post)
        lines.append("    }")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def rule(self):
        name, params = self.rng.choice(self.funcs)
        frees = [f"$a{j}" for j in range(len(params))]
        names = self.vars + frees
        lines = [f"rule check_{name}() {{"]
        for v in self.vars:
            lines.append(f"    assume({v} < {MAX_DOMAIN});")
        for s in frees:
            lines.append(f"    uint256 {s};")
            lines.append(f"    assume({s} < {MAX_DOMAIN});")
        if self.rng.random() < 0.4:
            lines.append(f"    assume({self.condition(names, div=False)});")
        lines.append(f"    {name}({', '.join(frees)});")
        for _ in range(self.rng.randint(1, 2)):
            lines.append(f"    assert({self.condition(names, div=False)});")
        lines.append("}")
        return "\n".join(lines) + "\n"


def generate(seed: int):
    """Return (contract_source, property_source, kind) for a seed.

    kind alternates between "rule" and "fspec" based on the seed so a
    seed range exercises both property forms.
    """
    g = TinyGen(seed)
    contract = g.contract()
    if seed % 2 == 0:
        return contract, g.rule(), "rule"
    return contract, g.fspec(), "fspec"
