export * from "./types.js";
export { splitSentences, tokenize, tagTokens, assignHeads, annotateSentence } from "./nlp.js";
export { normalizeSurface, phraseKey, parseKb, type KbIndex } from "./kb.js";
export { annotateCorpus, type AnnotateResult } from "./annotate.js";
export { verifyCorpus, type VerifyReport, type Violation } from "./verify.js";
