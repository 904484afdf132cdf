export {
  EmptyStoryError,
  annotateStory,
  newCounters,
  type RunCounters,
  type StoryRecord,
} from "./annotate.js";
export { annotateDependencies } from "./deps.js";
export { exportAnnotations, type ExportSummary } from "./export.js";
export {
  DataFormatError,
  parseLabelFile,
  parseStoryFile,
  toJsonLine,
  type RawStory,
} from "./io.js";
export {
  DEP_TAGS,
  ENTITY_LABELS,
  ENTITY_MAP,
  MAPPING_VERSION,
  POS_TAGS,
  UNKNOWN,
  applyTagConventions,
  mapPos,
} from "./tags.js";
