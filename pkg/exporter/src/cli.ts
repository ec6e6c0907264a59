#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadCheckpoint } from "./encoder";
import { exportEmbeddings } from "./export";

export async function runCli(argv: string[]): Promise<number> {
  try {
    const args = await yargs(argv)
      .scriptName("export-embeddings")
      .usage("$0 --model <checkpoint> --input <sentences.tsv> --output <embeddings.tsv>")
      .option("model", {
        type: "string",
        demandOption: true,
        describe: "Checkpoint id or path to a checkpoint descriptor file",
      })
      .option("input", {
        type: "string",
        demandOption: true,
        describe: "Sentence file: one '<sentence_id>\\t<text>' per line",
      })
      .option("output", {
        type: "string",
        demandOption: true,
        describe: "Embedding file to write (skip log goes to '<output>.log')",
      })
      .option("batch", {
        type: "number",
        default: 32,
        describe: "Sentences encoded per batch",
      })
      .option("include-special-tokens", {
        type: "boolean",
        default: false,
        describe: "Pool over the begin/end markers too",
      })
      .strict()
      .exitProcess(false)
      .fail((msg, err) => {
        throw err ?? new Error(msg);
      })
      .parse();

    const ckpt = loadCheckpoint(args.model);
    const report = exportEmbeddings(ckpt, args.input, args.output, {
      batch: args.batch,
      includeSpecialTokens: args["include-special-tokens"],
    });
    console.log(`wrote ${report.written} vectors (dim ${ckpt.dim}) to ${report.outputPath}`);
    if (report.sidecarPath) {
      console.warn(`${report.skipped.length} sentence(s) skipped; see ${report.sidecarPath}`);
    }
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

if (require.main === module) {
  void runCli(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
