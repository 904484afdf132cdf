"""Deterministic surrogate story corpus for desk-scale experiments.

Stories follow the "As a <role>, I want to <feature>, so that <reason>"
template with hand-built per-token annotations that copy the worked
examples' conventions (no punctuation tokens, "I" substituted by
PERSON, possessives tagged DET/poss).

One rule decides the disclosure label everywhere: a story discloses
exactly when its feature verb is an open-access or hand-over verb AND
its object is personal (a dictionary noun or an out-of-dictionary
sensitive noun). Eleven recipes then spread the same verbs, nouns,
determiners, and prepositional add-ons across both label sides so that
no single surface token settles a story:

  words+disclosure  strong (open verb, dictionary object),
                    possessive_only (hand-over verb, dictionary object),
                    conjunctive (hand-over verb, sensitive object, and a
                    stray dictionary word in the reason clause)
  words only        open verb on a neutral object, plain verb on a
                    regulation noun, doubled open-access words,
                    credential upkeep, plain verb on a private object
  disclosure only   hand-over verb on a sensitive object, no dictionary
                    word anywhere
  neither           plain or hand-over verbs on neutral objects, under
                    "the" or a possessive in equal measure

Separating conjunctive from disclosure-only takes the stray dictionary
word; category-fraction views read it directly while unigram text views
must memorise dozens of rare surface forms. In the fraction view each
category stays one-sided (whichever side dominates a category carries
the bulk of its mass), so the small crossover recipes (upkeep, bare
private objects, regulation nouns) set a floor on dictionary-view error
without breaking linear separability.

Every reason clause comes from one shared template table in which each
template carries exactly one noun slot; the conjunctive recipe fills
the slot with its stray word and every other recipe fills it with a
workflow filler noun. Clause shape therefore carries no label signal,
and families within each pool plus surface forms within each family
are sampled on a 1/(rank+1) curve, so both slot distributions keep a
long tail of words too rare for a training fold to cover. A story
whose slot word falls outside the fold vocabulary is genuinely
ambiguous to a unigram or position view, while prefix patterns read
the raw word either way.

Word pools are vetted against the seed dictionary; the generator
recomputes every story's matches and raises if the signature or derived
kind disagrees with its recipe.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .corpus import (Corpus, LinguisticAnnotation, StoryKind, UserStory,
                     classify_kind)
from .errors import ConfigError, RunError
from .lexicon import (PrivacyDictionary, aggregate_counts,
                      load_seed_dictionary, match_story)
from .util import rng_for

# one annotated token: (surface, pos, dep, entity label or None)
Tok = tuple[str, str, str, str | None]


def _toks(*items: Tok) -> list[Tok]:
    return list(items)


def _family(*forms: str) -> tuple[str, ...]:
    return forms


# -- word pools (every form vetted against the seed dictionary; the
#    generator asserts each story's final signature) -------------------

# verbs that match OpenVisible, most common first
OV_VERBS = ("share", "publish", "post", "display", "disclose", "announce",
            "expose", "report", "broadcast", "reveal", "show", "open",
            "access", "publicize", "showcase")

# hand-over verbs that match no dictionary category
DISCLOSURE_VERBS = ("send", "upload", "submit", "forward", "transmit",
                    "provide", "distribute", "attach", "circulate", "mail",
                    "deliver", "relay", "dispatch", "transfer", "route",
                    "ship", "convey")

PLAIN_VERBS = ("filter", "sort", "export", "browse", "organize", "archive",
               "merge", "configure", "preview", "rename", "duplicate",
               "import", "validate", "compare", "index", "refresh",
               "translate", "bookmark", "customize", "summarize", "annotate",
               "categorize", "search", "collate")

MAINTENANCE_VERBS = ("reset", "update", "change", "renew", "verify",
                     "rotate", "review", "confirm", "edit", "manage",
                     "adjust")

PS_NOUNS = (_family("password", "passwords"),
            _family("credentials", "credential"),
            _family("address", "addresses"),
            _family("data"),
            _family("email", "emails"),
            _family("identity", "identities"),
            _family("records", "record"),
            _family("secrets", "secret"),
            _family("passcode", "passcodes"),
            _family("pin"),
            _family("ssn"),
            _family("passphrase", "passphrases"),
            _family("recordings", "recording"),
            _family("dossier", "dossiers"))

# credentials the self-maintenance recipe may act on
OWN_PS_NOUNS = (_family("password", "passwords"),
                _family("passcode", "passcodes"),
                _family("passphrase", "passphrases"),
                _family("credentials", "credential"),
                _family("address", "addresses"),
                _family("email", "emails"),
                _family("pin"))

OV_NOUNS = (_family("report", "reports"),
            _family("announcement", "announcements"))

LAW_NOUNS = (_family("law", "laws"),
             _family("regulation", "regulations"),
             _family("statute", "statutes"),
             _family("lawsuit", "lawsuits"),
             _family("warrant", "warrants"),
             _family("subpoena", "subpoenas"),
             _family("jurisdiction", "jurisdictions"),
             _family("legislation"),
             _family("court", "courts"),
             _family("mandate", "mandates"),
             _family("compliance"),
             _family("directive", "directives"),
             _family("ordinance", "ordinances"),
             _family("bylaws", "bylaw"),
             _family("enforcement"))

NORMS_NOUNS = (_family("policy", "policies"),
               _family("rule", "rules"),
               _family("permission", "permissions"),
               _family("contract", "contracts"),
               _family("agreement", "agreements"),
               _family("obligation", "obligations"),
               _family("principle", "principles"),
               _family("terms"),
               _family("guidelines", "guideline"),
               _family("protocol", "protocols"),
               _family("norms"),
               _family("duty"),
               _family("ethics"),
               _family("authorization", "authorizations"))

OUTCOME_NOUNS = (_family("reputation", "reputations"),
                 _family("embarrassment"),
                 _family("stigma"),
                 _family("dignity"),
                 _family("autonomy"),
                 _family("solitude"),
                 _family("humiliation"),
                 _family("isolation"),
                 _family("vulnerability"),
                 _family("loneliness"),
                 _family("shame"),
                 _family("withdrawal"))

STRAY_POOLS = (("Law", LAW_NOUNS), ("NormsRequisites", NORMS_NOUNS),
               ("OutcomeState", OUTCOME_NOUNS))

# regulation objects read naturally only for law and norms nouns
REG_OBJ_POOLS = (("Law", LAW_NOUNS), ("NormsRequisites", NORMS_NOUNS))

SENSITIVE_NOUNS = (_family("photos", "photo", "snapshots", "selfies"),
                   _family("location", "locations", "coordinates"),
                   _family("salary", "salaries", "wages", "earnings"),
                   _family("birthday", "birthdays", "birthdate"),
                   _family("diagnosis", "diagnoses", "symptoms",
                           "allergies"),
                   _family("medication", "medications", "prescriptions",
                           "dosage"),
                   _family("itinerary", "itineraries", "flights"),
                   _family("timesheet", "timesheets", "shifts"),
                   _family("paycheck", "paychecks", "payslips"),
                   _family("resume", "resumes"),
                   _family("whereabouts"),
                   _family("transcripts", "grades"),
                   _family("biometrics", "fingerprints"),
                   _family("appointments", "appointment"),
                   _family("vaccinations", "vaccination"),
                   _family("screenings", "screening"),
                   _family("referrals", "referral"),
                   _family("bloodwork"),
                   _family("commute"))

NEUTRAL_NOUNS = (_family("dashboard", "dashboards", "overview"),
                 _family("invoice", "invoices", "receipts"),
                 _family("ticket", "tickets"),
                 _family("calendar", "calendars"),
                 _family("layout", "layouts"),
                 _family("template", "templates", "presets"),
                 _family("workflow", "workflows"),
                 _family("catalog", "catalogs"),
                 _family("timeline", "timelines"),
                 _family("bookmark", "bookmarks"),
                 _family("draft", "drafts"),
                 _family("avatar", "avatars"),
                 _family("playlist", "playlists"),
                 _family("chart", "charts", "graphs"),
                 _family("theme", "themes"),
                 _family("plugin", "plugins", "addons"),
                 _family("webhook", "webhooks"),
                 _family("queue", "queues"),
                 _family("glossary", "glossaries"),
                 _family("sitemap", "sitemaps"),
                 _family("backlog", "backlogs"),
                 _family("roadmap", "roadmaps"),
                 _family("widget", "widgets"),
                 _family("newsletter", "newsletters"),
                 _family("survey", "surveys", "polls"),
                 _family("notes", "note"), _family("files", "file"),
                 _family("messages", "message"),
                 _family("documents", "document"),
                 _family("details", "detail"),
                 _family("snippets", "snippet"),
                 _family("changelog", "changelogs"),
                 _family("checklist", "checklists"),
                 _family("banners", "banner"),
                 _family("thumbnails", "thumbnail"),
                 _family("slideshow", "slideshows"),
                 _family("sandbox", "sandboxes"),
                 _family("stylesheet", "stylesheets"),
                 _family("digest", "digests"),
                 _family("taglines", "tagline"),
                 _family("tutorials", "tutorial"),
                 _family("walkthrough", "walkthroughs"),
                 _family("flowchart", "flowcharts"),
                 _family("storyboards", "storyboard"),
                 _family("mockups", "mockup"),
                 _family("wireframes", "wireframe"),
                 _family("breadcrumbs", "breadcrumb"))

# reason-slot nouns for every recipe except conjunctive, which puts a
# stray dictionary noun in the same slot. The pool is deliberately much
# wider than the stray pools: fillers are drawn by nearly every story
# while strays only appear in one recipe, so a wide pool keeps the two
# slot distributions starved to a similar degree under the fold
# min-count cut. A rare slot word is then equally likely on either
# label side, and only the dictionary can read what it was.
FILLER_NOUNS = (_family("budget", "budgets"),
                _family("schedule", "schedules"),
                _family("milestone", "milestones"),
                _family("deadline", "deadlines"),
                _family("forecast", "forecasts"),
                _family("estimate", "estimates"),
                _family("agenda", "agendas"),
                _family("roster", "rosters"),
                _family("quota", "quotas"),
                _family("metric", "metrics"),
                _family("baseline", "baselines"),
                _family("benchmark", "benchmarks"),
                _family("threshold", "thresholds"),
                _family("workload", "workloads"),
                _family("pipeline", "pipelines"),
                _family("checkpoint", "checkpoints"),
                _family("cadence"),
                _family("quarter", "quarters"),
                _family("memo", "memos"),
                _family("briefing", "briefings"),
                _family("handbook", "handbooks"),
                _family("manual", "manuals"),
                _family("playbook", "playbooks"),
                _family("runbook", "runbooks"),
                _family("blueprint", "blueprints"),
                _family("outline", "outlines"),
                _family("diagram", "diagrams"),
                _family("summary", "summaries"),
                _family("scorecard", "scorecards"),
                _family("tally", "tallies"),
                _family("headcount"),
                _family("turnout"),
                _family("uptime"),
                _family("latency"),
                _family("throughput"),
                _family("capacity"),
                _family("inventory", "inventories"),
                _family("cohort", "cohorts"),
                _family("segment", "segments"),
                _family("funnel", "funnels"),
                _family("objective", "objectives"),
                _family("target", "targets"),
                _family("goal", "goals"),
                _family("initiative", "initiatives"),
                _family("epic", "epics"),
                _family("proposal", "proposals"),
                _family("bid", "bids"),
                _family("tender", "tenders"),
                _family("vendor", "vendors"),
                _family("supplier", "suppliers"),
                _family("procurement"),
                _family("allocation", "allocations"),
                _family("allotment", "allotments"),
                _family("incident", "incidents"),
                _family("outage", "outages"),
                _family("retro", "retros"),
                _family("escalation", "escalations"),
                _family("triage"),
                _family("alert", "alerts"),
                _family("alarm", "alarms"),
                _family("heatmap", "heatmaps"),
                _family("conversion", "conversions"),
                _family("retention"),
                _family("churn"),
                _family("velocity"),
                _family("experiment", "experiments"),
                _family("variant", "variants"),
                _family("flag", "flags"),
                _family("batch", "batches"),
                _family("sample", "samples"),
                _family("prototype", "prototypes"),
                _family("schematic", "schematics"),
                _family("scaffold", "scaffolds"),
                _family("boilerplate"),
                _family("stub", "stubs"),
                _family("fixture", "fixtures"),
                _family("patch", "patches"),
                _family("hotfix", "hotfixes"),
                _family("build", "builds"),
                _family("artifact", "artifacts"),
                _family("binary", "binaries"),
                _family("container", "containers"),
                _family("cluster", "clusters"),
                _family("instance", "instances"),
                _family("replica", "replicas"),
                _family("shard", "shards"),
                _family("partition", "partitions"),
                _family("namespace", "namespaces"),
                _family("registry", "registries"),
                _family("repository", "repositories"),
                _family("branch", "branches"),
                _family("commit", "commits"),
                _family("tag", "tags"),
                _family("badge", "badges"),
                _family("icon", "icons"),
                _family("logo", "logos"),
                _family("palette", "palettes"),
                _family("font", "fonts"),
                _family("typeface", "typefaces"),
                _family("grid", "grids"),
                _family("canvas", "canvases"),
                _family("frame", "frames"),
                _family("viewport", "viewports"),
                _family("modal", "modals"),
                _family("tooltip", "tooltips"),
                _family("dropdown", "dropdowns"),
                _family("carousel", "carousels"),
                _family("accordion", "accordions"),
                _family("footer", "footers"),
                _family("header", "headers"),
                _family("navbar", "navbars"),
                _family("toolbar", "toolbars"),
                _family("ribbon", "ribbons"),
                _family("pane", "panes"),
                _family("panel", "panels"),
                _family("popup", "popups"),
                _family("overlay", "overlays"),
                _family("spreadsheet", "spreadsheets"),
                _family("workbook", "workbooks"),
                _family("notebook", "notebooks"),
                _family("logbook", "logbooks"),
                _family("binder", "binders"),
                _family("folder", "folders"),
                _family("taxonomy", "taxonomies"),
                _family("hierarchy", "hierarchies"),
                _family("matrix", "matrices"),
                _family("rubric", "rubrics"),
                _family("syllabus", "syllabuses"),
                _family("curriculum", "curricula"),
                _family("quiz", "quizzes"),
                _family("leaderboard", "leaderboards"),
                _family("scoreboard", "scoreboards"),
                _family("standings"),
                _family("bracket", "brackets"),
                _family("lineup", "lineups"),
                _family("storefront", "storefronts"),
                _family("checkout", "checkouts"),
                _family("cart", "carts"),
                _family("coupon", "coupons"),
                _family("voucher", "vouchers"),
                _family("rebate", "rebates"),
                _family("refund", "refunds"),
                _family("discount", "discounts"),
                _family("markup", "markups"),
                _family("pricing"),
                _family("surcharge", "surcharges"),
                _family("shipment", "shipments"),
                _family("waybill", "waybills"),
                _family("freight"),
                _family("cargo"),
                _family("consignment", "consignments"),
                _family("depot", "depots"),
                _family("floorplan", "floorplans"),
                _family("venue", "venues"),
                _family("annex", "annexes"),
                _family("atrium", "atriums"),
                _family("sensor", "sensors"),
                _family("gauge", "gauges"),
                _family("meter", "meters"),
                _family("dial", "dials"),
                _family("beacon", "beacons"),
                _family("firmware"),
                _family("middleware"),
                _family("kernel", "kernels"),
                _family("daemon", "daemons"),
                _family("scheduler", "schedulers"),
                _family("compiler", "compilers"),
                _family("linter", "linters"),
                _family("debugger", "debuggers"),
                _family("profiler", "profilers"),
                _family("emulator", "emulators"),
                _family("simulator", "simulators"),
                _family("cache", "caches"),
                _family("buffer", "buffers"),
                _family("checksum", "checksums"),
                _family("payload", "payloads"),
                _family("timestamp", "timestamps"),
                _family("timezone", "timezones"),
                _family("timeframe", "timeframes"),
                _family("cutoff", "cutoffs"),
                _family("horizon", "horizons"),
                _family("interval", "intervals"),
                _family("duration", "durations"),
                _family("appendix", "appendices"),
                _family("footnote", "footnotes"),
                _family("caption", "captions"),
                _family("subtitle", "subtitles"),
                _family("heading", "headings"),
                _family("preface", "prefaces"),
                _family("addendum", "addenda"),
                _family("almanac", "almanacs"),
                _family("thesaurus", "thesauruses"),
                _family("stakeholder", "stakeholders"),
                _family("quorum", "quorums"),
                _family("gazetteer", "gazetteers"),
                _family("validator", "validators"),
                _family("formatter", "formatters"),
                _family("parser", "parsers"),
                _family("renderer", "renderers"),
                _family("crawler", "crawlers"),
                _family("indexer", "indexers"))

COMPOUND_MODIFIERS = ("account", "billing", "login", "payment", "backup",
                      "profile", "contact")

ROLES: tuple[tuple[str, ...], ...] = (
    ("developer",), ("designer",), ("manager",), ("customer",),
    ("visitor",), ("moderator",), ("researcher",), ("analyst",),
    ("editor",), ("subscriber",), ("librarian",), ("volunteer",),
    ("organizer",), ("recruiter",), ("translator",), ("reviewer",),
    ("project", "manager"), ("support", "agent"), ("content", "editor"),
    ("site", "member"), ("team", "lead"), ("product", "owner"),
    ("account", "manager"), ("billing", "clerk"), ("sales", "associate"),
)

ORG_NAMES = ("Dropbox", "Salesforce", "Asana", "Jira", "Trello", "Figma",
             "Zendesk", "Notion")

POSSESSIVES = ("my", "our")

RECIPIENTS = ("team", "board", "group", "committee", "reviewers")

PLAIN_PPS = ((("for", "the", "audit"),), (("in", "the", "sidebar"),),
             (("on", "the", "homepage"),), (("for", "the", "sprint"),))


def _zipf_pick(rng: np.random.Generator, options):
    """rank-weighted pick: probability of rank r is proportional to 1/(r+1)."""
    weights = np.array([1.0 / (i + 1) for i in range(len(options))])
    return options[int(rng.choice(len(options), p=weights / weights.sum()))]


def _pick(rng: np.random.Generator, options):
    return options[int(rng.integers(0, len(options)))]


def _det(rng, poss: str, poss_p: float) -> str:
    return poss if rng.random() < poss_p else "the"


def _pick_stray(rng):
    """Stray pool at fixed odds; outcome words half as common as the rest."""
    u = rng.random()
    if u < 0.4:
        return STRAY_POOLS[0]
    if u < 0.8:
        return STRAY_POOLS[1]
    return STRAY_POOLS[2]


def _noun_phrase(rng, det: str, family, compound_p: float = 0.0) -> list[Tok]:
    """Determiner plus optional compound modifier plus a family surface form."""
    dep = "poss" if det in POSSESSIVES else "det"
    out = _toks((det, "DET", dep, None))
    if compound_p > 0 and rng.random() < compound_p:
        out.append((_pick(rng, COMPOUND_MODIFIERS), "NOUN", "compound", None))
    out.append((_zipf_pick(rng, family), "NOUN", "dobj", None))
    return out


def _recipient_pp(rng, org_p: float = 0.25) -> list[Tok]:
    prep = _pick(rng, ("with", "to"))
    if rng.random() < org_p:
        return _toks((prep, "ADP", "prep", None), ("the", "DET", "det", None),
                     (_pick(rng, ORG_NAMES), "PROPN", "compound", "ORG"),
                     ("team", "NOUN", "pobj", None))
    return _toks((prep, "ADP", "prep", None), ("the", "DET", "det", None),
                 (_pick(rng, RECIPIENTS), "NOUN", "pobj", None))


def _plain_pp(rng) -> list[Tok]:
    (words,) = _pick(rng, PLAIN_PPS)
    prep, det, noun = words
    return _toks((prep, "ADP", "prep", None), (det, "DET", "det", None),
                 (noun, "NOUN", "pobj", None))


# -- reason clauses -------------------------------------------------------
#
# One template table serves every recipe. Each template embeds exactly
# one noun slot; which template fires is independent of the label, so
# the clause shape (word order, part-of-speech and dependency make-up)
# says nothing about the story. The only reason-side difference between
# recipes is the word in the slot: a stray dictionary noun for the
# conjunctive recipe, a filler noun for everyone else.

def _reason(rng, noun: str) -> list[Tok]:
    choice = int(rng.integers(0, 14))
    if choice == 0:
        return _toks(("I", "PRON", "nsubj", "PERSON"),
                     ("can", "VERB", "aux", None),
                     ("find", "VERB", "advcl", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "dobj", None),
                     ("later", "ADV", "advmod", None))
    if choice == 1:
        n = str(int(rng.integers(2, 6)))
        return _toks(("I", "PRON", "nsubj", "PERSON"),
                     ("can", "VERB", "aux", None),
                     ("plan", "VERB", "advcl", None),
                     ("the", "DET", "det", None),
                     ("next", "ADJ", "amod", None),
                     (n, "NUM", "nummod", "CARDINAL"),
                     ("sprints", "NOUN", "dobj", None),
                     ("around", "ADP", "prep", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "pobj", None))
    if choice == 2:
        return _toks(("the", "DET", "det", None),
                     (noun, "NOUN", "nsubj", None),
                     ("stays", "VERB", "advcl", None),
                     ("aligned", "ADJ", "acomp", None))
    if choice == 3:
        return _toks(("nothing", "PRON", "nsubj", None),
                     ("in", "ADP", "prep", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "pobj", None),
                     ("gets", "VERB", "advcl", None),
                     ("lost", "VERB", "acomp", None))
    if choice == 4:
        return _toks(("the", "DET", "det", None),
                     (noun, "NOUN", "nsubj", None),
                     ("moves", "VERB", "advcl", None),
                     ("faster", "ADV", "advmod", None))
    if choice == 5:
        return _toks(("everyone", "PRON", "nsubj", None),
                     ("sees", "VERB", "advcl", None),
                     ("the", "DET", "det", None),
                     ("same", "ADJ", "amod", None),
                     (noun, "NOUN", "dobj", None))
    if choice == 6:
        return _toks(("the", "DET", "det", None),
                     (_pick(rng, ORG_NAMES), "PROPN", "compound", "PRODUCT"),
                     (noun, "NOUN", "nsubj", None),
                     ("stays", "VERB", "advcl", None),
                     ("current", "ADJ", "acomp", None))
    if choice == 7:
        return _toks(("the", "DET", "det", None),
                     (noun, "NOUN", "nsubj", None),
                     ("is", "AUX", "advcl", None),
                     ("easier", "ADJ", "acomp", None),
                     ("to", "PART", "aux", None),
                     ("maintain", "VERB", "xcomp", None))
    if choice == 8:
        return _toks(("we", "PRON", "nsubj", None),
                     ("stay", "VERB", "advcl", None),
                     ("within", "ADP", "prep", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "pobj", None))
    if choice == 9:
        return _toks(("the", "DET", "det", None),
                     (noun, "NOUN", "nsubj", None),
                     ("is", "AUX", "advcl", None),
                     ("satisfied", "ADJ", "acomp", None))
    if choice == 10:
        return _toks(("I", "PRON", "nsubj", "PERSON"),
                     ("can", "VERB", "aux", None),
                     ("follow", "VERB", "advcl", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "dobj", None))
    # reason clauses also carry workflow verbs, so verb identity alone
    # does not reveal which clause (feature or reason) it came from
    if choice == 11:
        return _toks(("I", "PRON", "nsubj", "PERSON"),
                     ("can", "VERB", "aux", None),
                     (_zipf_pick(rng, PLAIN_VERBS), "VERB", "advcl", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "dobj", None),
                     ("later", "ADV", "advmod", None))
    if choice == 12:
        return _toks(("the", "DET", "det", None),
                     ("team", "NOUN", "nsubj", None),
                     ("can", "VERB", "aux", None),
                     (_zipf_pick(rng, PLAIN_VERBS), "VERB", "advcl", None),
                     ("the", "DET", "det", None),
                     (noun, "NOUN", "dobj", None))
    return _toks(("I", "PRON", "nsubj", "PERSON"),
                 ("can", "VERB", "aux", None),
                 (_zipf_pick(rng, MAINTENANCE_VERBS), "VERB", "advcl", None),
                 ("the", "DET", "det", None),
                 (noun, "NOUN", "dobj", None),
                 ("quickly", "ADV", "advmod", None))


def _reason_generic(rng) -> list[Tok]:
    return _reason(rng, _zipf_pick(rng, _zipf_pick(rng, FILLER_NOUNS)))


def _reason_with_stray(rng, family) -> list[Tok]:
    return _reason(rng, _zipf_pick(rng, family))


# -- story assembly -------------------------------------------------------

def _frame(rng, verb_phrase: list[Tok], reason: list[Tok]):
    role = _pick(rng, ROLES)
    article = "an" if role[0][0] in "aeiou" else "a"
    toks: list[Tok] = [("As", "SCONJ", "prep", None),
                       (article, "DET", "det", None)]
    for i, word in enumerate(role):
        dep = "pobj" if i == len(role) - 1 else "compound"
        toks.append((word, "NOUN", dep, None))
    toks += [("I", "PRON", "nsubj", "PERSON"),
             ("want", "VERB", "ROOT", None),
             ("to", "PART", "aux", None)]
    toks += verb_phrase
    feature_end = len(toks)
    toks += [("so", "SCONJ", "mark", None), ("that", "SCONJ", "mark", None)]
    toks += reason
    words = [t[0] for t in toks]
    role_end = 2 + len(role)
    text = (" ".join(words[:role_end]) + ", "
            + " ".join(words[role_end:feature_end]) + ", "
            + " ".join(words[feature_end:]) + ".")
    return toks, text


@dataclass(frozen=True)
class Recipe:
    name: str
    weight: Fraction
    label: int
    kind: StoryKind


RECIPES = (
    Recipe("strong", Fraction(1, 8), 1, StoryKind.PW_AND_DI),
    Recipe("possessive_only", Fraction(9, 80), 1, StoryKind.PW_AND_DI),
    Recipe("conjunctive", Fraction(11, 80), 1, StoryKind.PW_AND_DI),
    Recipe("pw_open_object", Fraction(3, 40), 0, StoryKind.PW_ONLY),
    Recipe("pw_regulation", Fraction(3, 200), 0, StoryKind.PW_ONLY),
    Recipe("pw_double_open", Fraction(1, 80), 0, StoryKind.PW_ONLY),
    Recipe("pw_own_upkeep", Fraction(3, 400), 0, StoryKind.PW_ONLY),
    Recipe("pw_bare_sensitive", Fraction(7, 400), 0, StoryKind.PW_ONLY),
    Recipe("di_only", Fraction(1, 8), 1, StoryKind.DI_ONLY),
    Recipe("none_plain", Fraction(37, 200), 0, StoryKind.NONE),
    Recipe("none_possessive", Fraction(3, 16), 0, StoryKind.NONE),
)

assert sum(r.weight for r in RECIPES) == 1


def _build_verb_phrase(rng, recipe: str):
    """Verb phrase tokens plus the expected category-count signature."""
    poss = _pick(rng, POSSESSIVES)
    if recipe == "strong":
        vp = [(_zipf_pick(rng, OV_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, _det(rng, poss, 0.8), _zipf_pick(rng, PS_NOUNS),
                           compound_p=0.25)
        if rng.random() < 0.5:
            vp += _recipient_pp(rng)
        return vp, {"OpenVisible": 1, "PrivateSecret": 1}, None
    if recipe == "possessive_only":
        vp = [(_zipf_pick(rng, DISCLOSURE_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, poss, _zipf_pick(rng, PS_NOUNS), compound_p=0.25)
        if rng.random() < 0.5:
            vp += _recipient_pp(rng)
        return vp, {"PrivateSecret": 1}, None
    if recipe == "conjunctive":
        vp = [(_zipf_pick(rng, DISCLOSURE_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, _det(rng, poss, 0.8),
                           _zipf_pick(rng, SENSITIVE_NOUNS))
        if rng.random() < 0.45:
            vp += _recipient_pp(rng)
        category, pool = _pick_stray(rng)
        return vp, {category: 1}, _reason_with_stray(rng, _zipf_pick(rng, pool))
    if recipe == "pw_open_object":
        vp = [(_zipf_pick(rng, OV_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, _det(rng, poss, 0.3),
                           _zipf_pick(rng, NEUTRAL_NOUNS))
        if rng.random() < 0.3:
            vp += _plain_pp(rng)
        return vp, {"OpenVisible": 1}, None
    if recipe == "pw_regulation":
        vp = [(_zipf_pick(rng, PLAIN_VERBS), "VERB", "xcomp", None)]
        obj_category, obj_pool = _pick(rng, REG_OBJ_POOLS)
        vp += _noun_phrase(rng, "the", _zipf_pick(rng, obj_pool))
        return vp, {obj_category: 1}, None
    if recipe == "pw_double_open":
        vp = [(_zipf_pick(rng, OV_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, "the", _zipf_pick(rng, OV_NOUNS))
        return vp, {"OpenVisible": 2}, None
    if recipe == "pw_own_upkeep":
        vp = [(_zipf_pick(rng, MAINTENANCE_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, poss, _zipf_pick(rng, OWN_PS_NOUNS))
        return vp, {"PrivateSecret": 1}, None
    if recipe == "pw_bare_sensitive":
        vp = [(_zipf_pick(rng, PLAIN_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, _det(rng, poss, 0.3), _zipf_pick(rng, PS_NOUNS))
        return vp, {"PrivateSecret": 1}, None
    if recipe == "di_only":
        vp = [(_zipf_pick(rng, DISCLOSURE_VERBS), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, _det(rng, poss, 0.8),
                           _zipf_pick(rng, SENSITIVE_NOUNS))
        if rng.random() < 0.45:
            vp += _recipient_pp(rng)
        return vp, {}, None
    if recipe == "none_plain":
        verbs = DISCLOSURE_VERBS if rng.random() < 0.25 else PLAIN_VERBS
        vp = [(_zipf_pick(rng, verbs), "VERB", "xcomp", None)]
        vp += _noun_phrase(rng, "the", _zipf_pick(rng, NEUTRAL_NOUNS))
        u = rng.random()
        if u < 0.3:
            vp += _plain_pp(rng)
        elif u < 0.55:
            vp += _recipient_pp(rng)
        return vp, {}, None
    if recipe == "none_possessive":
        hand_over = rng.random() < 0.25
        verbs = DISCLOSURE_VERBS if hand_over else PLAIN_VERBS
        vp = [(_zipf_pick(rng, verbs), "VERB", "xcomp", None)]
        # a hand-over verb on a sensitive noun would read as disclosure,
        # so the sensitive branch stays behind plain verbs only
        if not hand_over and rng.random() < 0.2:
            vp += _noun_phrase(rng, poss, _zipf_pick(rng, SENSITIVE_NOUNS))
        else:
            vp += _noun_phrase(rng, poss, _zipf_pick(rng, NEUTRAL_NOUNS))
        u = rng.random()
        if u < 0.3:
            vp += _plain_pp(rng)
        elif u < 0.55:
            vp += _recipient_pp(rng)
        return vp, {}, None
    raise ConfigError(f"unknown recipe {recipe!r}")


def _quota(weights: list[Fraction], n: int) -> list[int]:
    """Exact largest-remainder apportionment of n over fractional weights."""
    raw = [w * n for w in weights]
    counts = [int(r) for r in raw]
    remainders = sorted(
        range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    return counts


def generate_surrogate(n: int, seed: int,
                       dictionary: PrivacyDictionary | None = None) -> Corpus:
    """n annotated stories, half disclosing, kind mix fixed by recipe
    weights. Identical (n, seed) always yields identical stories."""
    if n < len(RECIPES):
        raise ConfigError(
            f"surrogate corpus needs at least {len(RECIPES)} stories, got {n}"
        )
    dictionary = dictionary or load_seed_dictionary()
    counts = _quota([r.weight for r in RECIPES], n)
    assignments = [r for r, c in zip(RECIPES, counts) for _ in range(c)]
    order = rng_for(seed, "order").permutation(len(assignments))

    stories = []
    for i, slot in enumerate(order):
        recipe = assignments[slot]
        rng = rng_for(seed, "story", i)
        vp, expected, reason = _build_verb_phrase(rng, recipe.name)
        if reason is None:
            reason = _reason_generic(rng)
        toks, text = _frame(rng, vp, reason)

        tokens = [t[0] for t in toks]
        pos = [t[1] for t in toks]
        dep = [t[2] for t in toks]
        entities = [t[3] if t[3] is not None else t[0] for t in toks]

        features = match_story(dictionary, tokens)
        categories = aggregate_counts(features, dictionary)
        if dict(categories) != expected:
            raise RunError(
                f"recipe {recipe.name!r} built signature {dict(categories)}, "
                f"expected {expected}: {text!r}"
            )
        words = features.matched_words()
        if classify_kind(words, recipe.label) is not recipe.kind:
            raise RunError(
                f"recipe {recipe.name!r} produced kind "
                f"{classify_kind(words, recipe.label)}, "
                f"expected {recipe.kind}: {text!r}"
            )
        stories.append(UserStory(
            id=f"sur-{i:06d}",
            dataset_id=(i % 4) + 1,
            text=text,
            annotation=LinguisticAnnotation(tokens, pos, dep, entities),
            label=recipe.label,
            privacy_words=words,
            privacy_categories=categories,
        ))
    return Corpus(stories)


def recipe_counts(n: int) -> dict[str, int]:
    """Recipe name to story count for a corpus of size n."""
    counts = _quota([r.weight for r in RECIPES], n)
    return {r.name: c for r, c in zip(RECIPES, counts)}
