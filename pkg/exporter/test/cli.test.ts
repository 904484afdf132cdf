import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";

const dirs: string[] = [];

function scratchDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "exporter-cli-"));
  dirs.push(dir);
  return dir;
}

afterAll(() => {
  for (const dir of dirs) {
    rmSync(dir, { recursive: true, force: true });
  }
});

let stderrText: string;
let stdoutText: string;

beforeEach(() => {
  stderrText = "";
  stdoutText = "";
  vi.spyOn(process.stderr, "write").mockImplementation((chunk) => {
    stderrText += String(chunk);
    return true;
  });
  vi.spyOn(process.stdout, "write").mockImplementation((chunk) => {
    stdoutText += String(chunk);
    return true;
  });
});

afterEach(() => {
  vi.restoreAllMocks();
});

describe("main", () => {
  it("prints usage and exits 0 on --help", () => {
    expect(main(["--help"])).toBe(0);
    expect(stdoutText).toContain("usage: annotate-exporter export");
    expect(stdoutText).toContain("tag mapping version");
  });

  it("exits 3 on an unknown command", () => {
    expect(main(["frobnicate"])).toBe(3);
    expect(stderrText).toContain("unknown command");
  });

  it("exits 3 when --in or --out is missing", () => {
    expect(main(["export", "--in", "stories.txt"])).toBe(3);
    expect(stderrText).toContain("--in and --out are required");
  });

  it("exits 3 on an unknown option", () => {
    expect(main(["export", "--frob", "x"])).toBe(3);
    expect(stderrText).toContain("usage:");
  });

  it("exits 3 when the input file does not exist", () => {
    const dir = scratchDir();
    expect(
      main([
        "export",
        "--in", join(dir, "missing.txt"),
        "--out", join(dir, "out.jsonl"),
      ]),
    ).toBe(3);
    expect(stderrText).toContain("error:");
  });

  it("exits 4 on malformed input data", () => {
    const dir = scratchDir();
    const input = join(dir, "stories.txt");
    writeFileSync(input, "one story\n\nanother\n", "utf8");
    expect(
      main(["export", "--in", input, "--out", join(dir, "out.jsonl")]),
    ).toBe(4);
    expect(stderrText).toContain("empty line");
  });

  it("exits 4 on a malformed label file", () => {
    const dir = scratchDir();
    const input = join(dir, "stories.txt");
    const labels = join(dir, "labels.tsv");
    writeFileSync(input, "a\tone story\n", "utf8");
    writeFileSync(labels, "a\tmaybe\n", "utf8");
    expect(
      main([
        "export",
        "--in", input,
        "--out", join(dir, "out.jsonl"),
        "--labels", labels,
      ]),
    ).toBe(4);
    expect(stderrText).toContain("label must be 0 or 1");
  });

  it("exits 0 and reports a summary on success", () => {
    const dir = scratchDir();
    const input = join(dir, "stories.txt");
    const labels = join(dir, "labels.tsv");
    const output = join(dir, "out.jsonl");
    writeFileSync(
      input,
      "a\tAs a user, I want to log in\nb\tAs a user, I want to log out\n",
      "utf8",
    );
    writeFileSync(labels, "a\t1\nzz\t1\n", "utf8");

    expect(main(["export", "--in", input, "--out", output, "--labels", labels])).toBe(0);
    expect(stderrText).toContain(`wrote 2 stories to ${output}`);
    expect(stderrText).toContain("labels merged: 1");
    expect(stderrText).toContain("label for unknown story id zz");

    const lines = readFileSync(output, "utf8").trimEnd().split("\n");
    expect(lines).toHaveLength(2);
    expect(JSON.parse(lines[0]).label).toBe(1);
    expect(JSON.parse(lines[1]).label).toBe(0);
  });
});
