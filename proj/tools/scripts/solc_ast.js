#!/usr/bin/env node
// Usage: node solc_ast.js <solc-module-dir> <input.sol> <output.ast.json>
// Compiles one file with solc-js in standard-JSON mode and writes the raw output.
const fs = require('fs');
const path = require('path');

const [moduleDir, input, output] = process.argv.slice(2);
if (!moduleDir || !input || !output) {
  console.error('usage: solc_ast.js <solc-module-dir> <input.sol> <output.ast.json>');
  process.exit(2);
}
const solc = require(path.resolve(moduleDir));
const name = path.basename(input);
const request = {
  language: 'Solidity',
  sources: { [name]: { content: fs.readFileSync(input, 'utf8') } },
  settings: { outputSelection: { '*': { '': ['ast'] } } },
};
const compile = solc.compileStandardWrapper || solc.compile;
const result = JSON.parse(compile(JSON.stringify(request)));
const errors = (result.errors || []).filter((e) => e.severity === 'error');
if (errors.length) {
  for (const e of errors) console.error(e.formattedMessage || e.message);
  process.exit(1);
}
for (const s of Object.values(result.sources || {})) delete s.legacyAST;
fs.writeFileSync(output, JSON.stringify(result));
