#!/usr/bin/env python3
"""Regenerates include/longreward/default_templates.hpp from templates/*.txt."""
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
IDS = ["helpfulness", "logicality", "fact_break", "fact_check", "extract_info", "completeness"]

parts = [
    "#pragma once\n\n",
    "// Stock judge prompts; identical to the files under templates/.\n\n",
    "#include <string_view>\n\n",
    "namespace longreward::default_templates {\n\n",
]
for name in IDS:
    body = (ROOT / "templates" / f"{name}.txt").read_text()
    if ")LRT\"" in body:
        raise SystemExit(f"{name}.txt contains the raw-string delimiter")
    parts.append(f'inline constexpr std::string_view {name} = R"LRT({body})LRT";\n\n')
parts.append("}  // namespace longreward::default_templates\n")
(ROOT / "include" / "longreward" / "default_templates.hpp").write_text("".join(parts))
