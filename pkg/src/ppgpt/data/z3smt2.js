#!/usr/bin/env node
// SMT-LIB v2 solver process: reads a script on stdin, prints the solver's
// answer (check-sat result, model, ...) on stdout. Backed by the z3-solver
// WASM build so it works on hosts without a native SMT solver.
//
// Usage: node z3smt2.js  (script on stdin)
// The z3-solver package is resolved from NODE_PATH, the working directory,
// or the repository root containing this file.

"use strict";

const path = require("path");

function resolveZ3() {
  const candidates = ["z3-solver"];
  // Walk upward from the working directory so the shim works no matter
  // where the package itself is installed.
  let dir = process.cwd();
  for (;;) {
    candidates.push(path.join(dir, "node_modules", "z3-solver"));
    const parent = path.dirname(dir);
    if (parent === dir) break;
    dir = parent;
  }
  candidates.push(path.join(__dirname, "..", "node_modules", "z3-solver"));
  for (const cand of candidates) {
    try {
      return require(cand);
    } catch (err) {
      if (err.code !== "MODULE_NOT_FOUND") throw err;
    }
  }
  throw new Error(
    "z3-solver not found; run `npm install` in the repository root or set NODE_PATH"
  );
}

async function main() {
  const chunks = [];
  for await (const chunk of process.stdin) chunks.push(chunk);
  const script = Buffer.concat(chunks).toString("utf8");

  const { init } = resolveZ3();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  Z3.del_config(cfg);

  const out = await Z3.eval_smtlib2_string(ctx, script);
  process.stdout.write(out);
  // Exit explicitly: the WASM runtime keeps worker threads alive otherwise.
  process.exit(0);
}

main().catch((err) => {
  process.stderr.write(String(err && err.stack ? err.stack : err) + "\n");
  process.exit(1);
});
