#!/usr/bin/env python3
"""Writes the synthetic fixtures used by the tests and the mock configuration.

Everything here is invented: a 50-declaration library slice, scripted
provider responses, two small benchmarks and a few prover problems.
Run from any directory; files land next to this script.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))

# name, kind, signature, value, deps, description
DECLS = [
    # natural numbers
    ("Nat.add_zero", "theorem", "∀ (n : ℕ), n + 0 = n", "fun n => rfl", [],
     "Adding zero on the right of a natural number leaves it unchanged."),
    ("Nat.zero_add", "theorem", "∀ (n : ℕ), 0 + n = n", "fun n => Nat.rec rfl (fun _ ih => congrArg Nat.succ ih) n",
     ["Nat.add_zero"], "Adding zero on the left of a natural number leaves it unchanged."),
    ("Nat.succ_add", "theorem", "∀ (n m : ℕ), n.succ + m = (n + m).succ", None, [],
     "The successor of n plus m equals the successor of the sum n plus m."),
    ("Nat.add_comm", "theorem", "∀ (n m : ℕ), n + m = m + n", None, ["Nat.zero_add", "Nat.succ_add", "Eq.symm"],
     "Addition of natural numbers is commutative: n plus m equals m plus n."),
    ("Nat.add_assoc", "theorem", "∀ (n m k : ℕ), n + m + k = n + (m + k)", None, ["Nat.succ_add"],
     "Addition of natural numbers is associative, so parentheses can be regrouped."),
    ("Nat.mul_one", "theorem", "∀ (n : ℕ), n * 1 = n", None, ["Nat.zero_add"],
     "Multiplying a natural number by one gives the same number."),
    ("Nat.mul_comm", "theorem", "∀ (n m : ℕ), n * m = m * n", None, ["Nat.add_comm", "Nat.mul_one"],
     "Multiplication of natural numbers is commutative: n times m equals m times n."),
    ("Nat.le_refl", "theorem", "∀ (n : ℕ), n ≤ n", None, [],
     "Every natural number is less than or equal to itself; the order is reflexive."),
    ("Nat.le_trans", "theorem", "∀ {n m k : ℕ}, n ≤ m → m ≤ k → n ≤ k", None, [],
     "The less-than-or-equal order on natural numbers is transitive."),
    ("Nat.lt_irrefl", "theorem", "∀ (n : ℕ), ¬n < n", None, ["Nat.le_refl"],
     "No natural number is strictly less than itself; the strict order is irreflexive."),
    ("Nat.Prime", "def", "ℕ → Prop", "fun p => Irreducible p", [],
     "A natural number is prime when it is irreducible: at least two and divisible only by one and itself."),
    ("Nat.Prime.two_le", "theorem", "∀ {p : ℕ}, p.Prime → 2 ≤ p", None, ["Nat.Prime", "Nat.le_trans"],
     "Every prime number is at least two."),
    ("Nat.factorial", "def", "ℕ → ℕ", "fun n => Nat.rec 1 (fun k ih => (k + 1) * ih) n", ["Nat.mul_comm"],
     "The factorial of n, the product of all positive natural numbers up to n, with factorial of zero equal to one."),
    ("Nat.factorial_pos", "theorem", "∀ (n : ℕ), 0 < n.factorial", None, ["Nat.factorial", "Nat.mul_one"],
     "The factorial of every natural number is strictly positive."),
    ("Nat.dvd_refl", "theorem", "∀ (n : ℕ), n ∣ n", None, ["Nat.mul_one"],
     "Every natural number divides itself; divisibility is reflexive."),
    # lists
    ("List.length", "def", "{α : Type u} → List α → ℕ", "fun l => List.rec 0 (fun _ _ ih => ih + 1) l", [],
     "The length of a list, counting its elements."),
    ("List.append", "def", "{α : Type u} → List α → List α → List α", "fun xs ys => List.rec ys (fun a _ ih => a :: ih) xs", [],
     "Concatenation of two lists, placing the second after the first."),
    ("List.length_append", "theorem", "∀ {α : Type u} (as bs : List α), (as ++ bs).length = as.length + bs.length", None,
     ["List.length", "List.append", "Nat.succ_add"],
     "The length of a concatenation of two lists is the sum of their lengths."),
    ("List.reverse", "def", "{α : Type u} → List α → List α", "fun as => List.reverseAux as []", ["List.append"],
     "Reverse a list so that its last element comes first."),
    ("List.reverse_reverse", "theorem", "∀ {α : Type u} (as : List α), as.reverse.reverse = as", None, ["List.reverse"],
     "Reversing a list twice gives back the original list; reverse is an involution."),
    ("List.map", "def", "{α β : Type u} → (α → β) → List α → List β", "fun f l => List.rec [] (fun a _ ih => f a :: ih) l", [],
     "Apply a function to every element of a list, producing the list of images."),
    ("List.length_map", "theorem", "∀ {α β : Type u} (as : List α) (f : α → β), (as.map f).length = as.length", None,
     ["List.map", "List.length"], "Mapping a function over a list preserves its length."),
    ("List.map_map", "theorem", "∀ (g : β → γ) (f : α → β) (l : List α), List.map g (List.map f l) = List.map (g ∘ f) l", None,
     ["List.map", "Function.comp"], "Mapping two functions in sequence over a list equals mapping their composition."),
    ("List.Sorted", "def", "{α : Type u} → (α → α → Prop) → List α → Prop", "fun r l => List.Pairwise r l", [],
     "A list is sorted with respect to a relation when every earlier element is related to every later one."),
    ("List.sum_append", "theorem", "∀ {M : Type u} [AddMonoid M] (l₁ l₂ : List M), (l₁ ++ l₂).sum = l₁.sum + l₂.sum", None,
     ["List.append", "Nat.add_assoc"], "The sum of a concatenation of lists is the sum of the two sums."),
    # algebra
    ("Monoid", "class", "Type u → Type u", "class Monoid (M : Type u) extends Semigroup M, MulOneClass M", [],
     "A monoid is a type with an associative multiplication and a two-sided identity element one."),
    ("Group", "class", "Type u → Type u", "class Group (G : Type u) extends DivInvMonoid G", ["Monoid"],
     "A group is a monoid in which every element has an inverse whose product with it is one."),
    ("CommGroup", "class", "Type u → Type u", "class CommGroup (G : Type u) extends Group G, CommMonoid G", ["Group"],
     "A commutative group, also called an abelian group, is a group whose multiplication is commutative."),
    ("mul_one", "theorem", "∀ {M : Type u} [MulOneClass M] (a : M), a * 1 = a", None, ["Monoid"],
     "Multiplying any element of a monoid by the identity one on the right leaves it unchanged."),
    ("one_mul", "theorem", "∀ {M : Type u} [MulOneClass M] (a : M), 1 * a = a", None, ["Monoid"],
     "Multiplying any element of a monoid by the identity one on the left leaves it unchanged."),
    ("inv_mul_cancel", "theorem", "∀ {G : Type u} [Group G] (a : G), a⁻¹ * a = 1", None, ["Group"],
     "In a group the inverse of an element times the element is the identity one."),
    ("mul_left_cancel", "theorem", "∀ {G : Type u} [Group G] {a b c : G}, a * b = a * c → b = c", None,
     ["inv_mul_cancel", "one_mul"], "In a group one can cancel a common factor on the left of an equation."),
    ("mul_inv_rev", "theorem", "∀ {G : Type u} [Group G] (a b : G), (a * b)⁻¹ = b⁻¹ * a⁻¹", None,
     ["inv_mul_cancel", "mul_one"], "The inverse of a product in a group is the product of the inverses in reverse order."),
    ("Group.toMonoid", "instance", "{G : Type u} → [Group G] → Monoid G", "inferInstance", ["Group", "Monoid"],
     "Every group is in particular a monoid."),
    ("Int.instCommGroup", "instance", "CommGroup (Multiplicative ℤ)", "Multiplicative.commGroup", ["CommGroup"],
     "The integers under addition form a commutative group, written multiplicatively."),
    ("Subgroup", "structure", "(G : Type u) → [Group G] → Type u",
     "structure Subgroup (G : Type u) [Group G] extends Submonoid G where inv_mem' : ∀ {x}, x ∈ carrier → x⁻¹ ∈ carrier",
     ["Group"], "A subgroup of a group is a subset containing one that is closed under multiplication and inverses."),
    ("Subgroup.one_mem", "theorem", "∀ {G : Type u} [Group G] (H : Subgroup G), 1 ∈ H", None, ["Subgroup"],
     "Every subgroup contains the identity element one."),
    ("Subgroup.mul_mem", "theorem", "∀ {G : Type u} [Group G] (H : Subgroup G) {x y : G}, x ∈ H → y ∈ H → x * y ∈ H", None,
     ["Subgroup"], "A subgroup is closed under multiplication: the product of two members is a member."),
    # analysis and topology
    ("Continuous", "def", "{X Y : Type u} → [TopologicalSpace X] → [TopologicalSpace Y] → (X → Y) → Prop",
     "fun f => ∀ s, IsOpen s → IsOpen (f ⁻¹' s)", [],
     "A function between topological spaces is continuous when the preimage of every open set is open."),
    ("continuous_id", "theorem", "∀ {X : Type u} [TopologicalSpace X], Continuous id", None, ["Continuous"],
     "The identity function on a topological space is continuous."),
    ("Continuous.comp", "theorem", "∀ {g : Y → Z} {f : X → Y}, Continuous g → Continuous f → Continuous (g ∘ f)", None,
     ["Continuous", "Function.comp"], "The composition of two continuous functions is continuous."),
    ("IsClosed", "def", "{X : Type u} → [TopologicalSpace X] → Set X → Prop", "fun s => IsOpen sᶜ", [],
     "A set is closed when its complement is open."),
    ("IsCompact", "def", "{X : Type u} → [TopologicalSpace X] → Set X → Prop",
     "fun s => ∀ f, f.NeBot → f ≤ 𝓟 s → ∃ x ∈ s, ClusterPt x f", [],
     "A set is compact when every open cover has a finite subcover, phrased with filters and cluster points."),
    ("IsCompact.image", "theorem", "∀ {s : Set X} {f : X → Y}, IsCompact s → Continuous f → IsCompact (f '' s)", None,
     ["IsCompact", "Continuous"], "The image of a compact set under a continuous function is compact."),
    ("IsCompact.isClosed", "theorem", "∀ [T2Space X] {s : Set X}, IsCompact s → IsClosed s", None,
     ["IsCompact", "IsClosed"], "In a Hausdorff space every compact set is closed."),
    ("Real.sqrt", "def", "ℝ → ℝ", "fun x => NNReal.sqrt (Real.toNNReal x)", [],
     "The square root of a real number, defined to be zero for negative inputs."),
    ("Real.sqrt_nonneg", "theorem", "∀ (x : ℝ), 0 ≤ √x", None, ["Real.sqrt"],
     "The square root of any real number is nonnegative."),
    ("Real.sq_sqrt", "theorem", "∀ {x : ℝ}, 0 ≤ x → √x ^ 2 = x", None, ["Real.sqrt", "Real.sqrt_nonneg"],
     "For a nonnegative real number, squaring its square root gives the number back."),
    ("PNat", "abbrev", "Type", "{ n : ℕ // 0 < n }", ["Nat.lt_irrefl"],
     "The positive natural numbers, as the subtype of natural numbers greater than zero."),
    ("Classical.choice", "axiom", "{α : Sort u} → Nonempty α → α", None, [],
     "The axiom of choice: from a proof that a type is nonempty, produce an element of it."),
]

assert len(DECLS) == 50, len(DECLS)
NAMES = {d[0] for d in DECLS}

# Declarations whose primary informalization fails and falls back.
PRIMARY_FAILS = ["List.Sorted", "Classical.choice"]


def record(d, informal=None):
    name, kind, sig, value, deps, _ = d
    file = "Mathlib/" + name.split(".")[0] + ".lean"
    line = 10 + (sum(map(ord, name)) % 900)
    return {"name": name, "kind": kind, "signature": sig, "value": value,
            "source": {"file": file, "line": line}, "deps": deps, "informal": informal}


def dump_jsonl(path, rows):
    with open(os.path.join(HERE, path), "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def dump_json(path, obj):
    with open(os.path.join(HERE, path), "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2)
        f.write("\n")


def corpus():
    dump_jsonl("corpus.jsonl", [record(d) for d in DECLS])
    dump_jsonl("corpus.informal.jsonl", [record(d, d[5]) for d in DECLS])


def informalizer_scripts():
    rules = []
    for d in DECLS:
        name = d[0]
        needle = "Declaration: " + name + "\n"
        if name in PRIMARY_FAILS:
            rules.append({"contains": needle, "error": "scripted outage"})
        else:
            rules.append({"contains": needle, "response": d[5]})
    dump_json("scripts/informalizer.json", {"model": "scripted-informalizer", "rules": rules})
    fb = [{"contains": "Declaration: " + d[0] + "\n", "response": d[5]} for d in DECLS if d[0] in PRIMARY_FAILS]
    dump_json("scripts/informalizer_fallback.json", {"model": "scripted-fallback", "rules": fb})


def sketch(*steps):
    return json.dumps({"steps": [{"description": a, "context": b, "query": c} for a, b, c in steps]})


MPR = [
    {
        "id": "mpr-1",
        "informal": "For natural numbers a and b, (a + b) * 1 = b + a.",
        "formal": "theorem mpr1 (a b : ℕ) : (a + b) * 1 = b + a",
        "groups": [{"group_id": "g1", "members": ["Nat.mul_one"]},
                   {"group_id": "g2", "members": ["Nat.add_comm"]}],
        "routings": [{"routing_id": "r1", "kind": "original", "group_ids": ["g1", "g2"]}],
        "sketch": sketch(("Remove the factor one", "multiplicative identity", "multiplying a natural number by one"),
                         ("Swap the summands", "commutativity", "addition of natural numbers is commutative")),
    },
    {
        "id": "mpr-2",
        "informal": "Reversing a list twice preserves its length.",
        "formal": "theorem mpr2 (l : List α) : l.reverse.reverse.length = l.length",
        "groups": [{"group_id": "g1", "members": ["List.reverse_reverse"]}],
        "routings": [{"routing_id": "r1", "kind": "original", "group_ids": ["g1"]}],
        "sketch": sketch(("Cancel the double reversal", "involution", "reversing a list twice gives the original list")),
    },
    {
        "id": "mpr-3",
        "informal": "The image of a compact set under a continuous map into a Hausdorff space is closed.",
        "formal": "theorem mpr3 [T2Space Y] {s : Set X} {f : X → Y} (hs : IsCompact s) (hf : Continuous f) : IsClosed (f '' s)",
        "groups": [{"group_id": "g1", "members": ["IsCompact.image"]},
                   {"group_id": "g2", "members": ["IsCompact.isClosed"]}],
        "routings": [{"routing_id": "r1", "kind": "original", "group_ids": ["g1", "g2"]}],
        "sketch": sketch(("Show the image is compact", "continuity", "image of a compact set under a continuous function"),
                         ("Compact sets are closed", "Hausdorff", "compact set in a Hausdorff space is closed")),
    },
    {
        "id": "mpr-4",
        "informal": "In a group, if a * b = a * c then b⁻¹ * c = 1.",
        "formal": "theorem mpr4 [Group G] {a b c : G} (h : a * b = a * c) : b⁻¹ * c = 1",
        "groups": [{"group_id": "g1", "members": ["mul_left_cancel"]},
                   {"group_id": "g2", "members": ["inv_mul_cancel"]},
                   {"group_id": "g3", "members": ["one_mul", "mul_one"]}],
        "routings": [{"routing_id": "r1", "kind": "original", "group_ids": ["g1", "g2"]},
                     {"routing_id": "r2", "kind": "alternative", "group_ids": ["g2", "g3"]}],
        "sketch": sketch(("Cancel a on the left", "group cancellation", "cancel a common left factor in a group"),
                         ("Inverse times itself", "group inverse", "inverse of an element times the element is one")),
        "reject": True,
    },
    {
        "id": "mpr-5",
        "informal": "The square root of a nonnegative real squared gives it back, and it is nonnegative.",
        "formal": "theorem mpr5 {x : ℝ} (hx : 0 ≤ x) : 0 ≤ √x ∧ √x ^ 2 = x",
        "groups": [{"group_id": "g1", "members": ["Real.sqrt_nonneg"]},
                   {"group_id": "g2", "members": ["Real.sq_sqrt"]}],
        "routings": [{"routing_id": "r1", "kind": "original", "group_ids": ["g1", "g2"]}],
        "sketch": sketch(("Nonnegativity", "square root", "square root of a real number is nonnegative"),
                         ("Square of the root", "square root", "squaring the square root of a nonnegative real")),
    },
]


def mpr():
    rows = [{k: v for k, v in m.items() if k not in ("sketch", "reject")} for m in MPR]
    dump_jsonl("mpr_bench.jsonl", rows)
    sketch_rules = [{"contains": m["formal"], "response": m["sketch"]} for m in MPR]
    dump_json("scripts/sketcher.json", {
        "model": "scripted-sketcher", "rules": sketch_rules,
        "default": sketch(("Unfold the statement", "", "basic identity for the objects in the statement"))})
    dump_json("scripts/reviser.json", {
        "model": "scripted-reviser", "rules": sketch_rules,
        "default": sketch(("Try a different route", "", "basic identity for the objects in the statement"))})
    judge_rules = [{"contains": m["formal"],
                    "response": json.dumps({"accepted": False, "feedback": [{"step": 1, "reason": "missing premise"}]})}
                   for m in MPR if m.get("reject")]
    dump_json("scripts/judge.json", {"model": "scripted-judge", "rules": judge_rules,
                                     "default": json.dumps({"accepted": True})})
    dump_json("scripts/filter.json", {
        "model": "scripted-filter",
        "rules": [{"contains": "Candidate: Classical.choice\n", "response": "no"},
                  {"contains": "Candidate: PNat\n", "response": "no"}],
        "default": "yes"})


QR = [
    ("Nat.add_comm", "easy", {"natural": "addition of natural numbers is commutative", "lean": "n + m = m + n"}),
    ("Nat.add_zero", "easy", {"natural": "adding zero on the right leaves a natural number unchanged"}),
    ("Nat.zero_add", "easy", {"natural": "adding zero on the left of a natural number"}),
    ("Nat.mul_comm", "easy", {"natural": "multiplication of natural numbers is commutative", "slogan": "times commutes"}),
    ("Nat.Prime.two_le", "hard", {"natural": "every prime number is at least two", "special_case": "a prime p satisfies 2 ≤ p"}),
    ("Nat.factorial_pos", "easy", {"natural": "factorial is strictly positive", "latex": "0 < n!"}),
    ("Nat.le_trans", "easy", {"natural": "less than or equal is transitive on natural numbers"}),
    ("Nat.dvd_refl", "easy", {"natural": "every natural number divides itself"}),
    ("List.length_append", "easy", {"natural": "length of a concatenation of two lists is the sum of lengths"}),
    ("List.reverse_reverse", "easy", {"natural": "reversing a list twice gives the original list", "nickname": "reverse is an involution"}),
    ("List.length_map", "hard", {"natural": "mapping a function over a list preserves its length"}),
    ("List.map_map", "hard", {"natural": "map of a composition of functions over a list"}),
    ("mul_left_cancel", "hard", {"natural": "cancel a common factor on the left in a group"}),
    ("mul_inv_rev", "hard", {"natural": "inverse of a product is product of inverses in reverse order", "latex": "(ab)^{-1} = b^{-1} a^{-1}"}),
    ("Subgroup.mul_mem", "easy", {"natural": "a subgroup is closed under multiplication"}),
    ("CommGroup", "hard", {"natural": "abelian group", "nickname": "commutative group"}),
    ("Continuous.comp", "easy", {"natural": "composition of continuous functions is continuous"}),
    ("IsCompact.image", "easy", {"natural": "image of a compact set under a continuous function is compact"}),
    ("IsCompact.isClosed", "hard", {"natural": "compact sets in a Hausdorff space are closed"}),
    ("Real.sqrt_nonneg", "easy", {"natural": "square root of a real number is nonnegative", "latex": "0 \\le \\sqrt{x}"}),
]


def qr():
    rows = []
    for name, diff, queries in QR:
        assert name in NAMES, name
        rows.append({"decl_name": name, "difficulty": diff,
                     "queries": [{"style": s, "text": t} for s, t in queries.items()]})
    dump_jsonl("qr_bench.jsonl", rows)


PROBLEMS = [
    {"id": "p-solved", "informal": "Zero added on the right is the identity.",
     "formal_statement": "theorem p1 (n : ℕ) : n + 0 = n := by sorry"},
    {"id": "p-stuck", "informal": "A hard statement the scripted prover never proves.",
     "formal_statement": "theorem p2 (n : ℕ) : n.factorial ≥ 1 := by sorry"},
    {"id": "p-reflect", "informal": "Addition is commutative.",
     "formal_statement": "theorem p3 (a b : ℕ) : a + b = b + a := by sorry"},
]


def prover():
    dump_jsonl("problems.jsonl", PROBLEMS)
    rules = [
        {"contains": "theorem p1", "response": "```lean\ntheorem p1 (n : ℕ) : n + 0 = n := by\n  -- sorry is not needed here\n  rfl\n```"},
        {"contains": ["theorem p3", "Your previous attempt"],
         "response": "```lean\ntheorem p3 (a b : ℕ) : a + b = b + a := by\n  exact Nat.add_comm a b\n```"},
        {"contains": "theorem p3", "response": "```lean\ntheorem p3 (a b : ℕ) : a + b = b + a := by\n  simp ERROR\n```"},
        {"contains": "theorem p2", "response": "```lean\ntheorem p2 (n : ℕ) : n.factorial ≥ 1 := by\n  sorry\n```"},
    ]
    dump_json("scripts/prover.json", {"model": "scripted-prover", "rules": rules})
    dump_json("scripts/query_rewriter.json", {"model": "scripted-rewriter",
                                              "default": "addition of natural numbers is commutative"})
    dump_json("scripts/verifier.json", {"default_goal": "⊢ goal", "rules": []})
    dump_json("scripts/ranking_judge.json", {"model": "scripted-ranking-judge",
                                             "default": "```json\n{\"ranking\": [\"A\", \"B\"]}\n```"})


def config():
    dump_json("mock_config.json", {
        "corpus": "corpus.informal.jsonl",
        "index": "index.bin",
        "template": {"kind_aware": True},
        "search": {"rerank": True, "rerank_pool": 50, "kind_aware": True},
        "reasoning": {"budget": 2, "max_revisions": 3, "reflection_enabled": True, "per_step_k": 10},
        "loop": {"reflection_rounds": 8, "prover_max_retries": 3, "verifier_max_retries": 3,
                 "verifier_wait_seconds": 0, "retrieval_mode": "none"},
        "server": {"host": "127.0.0.1", "port": 8080, "workers": 2},
        "providers": {
            "embedder": {"type": "hash", "dim": 64},
            "reranker": {"type": "overlap"},
            "informalizer": {"type": "scripted", "script": "scripts/informalizer.json"},
            "informalizer_fallback": {"type": "scripted", "script": "scripts/informalizer_fallback.json"},
            "sketcher": {"type": "scripted", "script": "scripts/sketcher.json"},
            "filter": {"type": "scripted", "script": "scripts/filter.json"},
            "judge": {"type": "scripted", "script": "scripts/judge.json"},
            "reviser": {"type": "scripted", "script": "scripts/reviser.json"},
            "prover": {"type": "scripted", "script": "scripts/prover.json"},
            "query_rewriter": {"type": "scripted", "script": "scripts/query_rewriter.json"},
            "verifier": {"type": "scripted", "script": "scripts/verifier.json"},
            "ranking_judge": {"type": "scripted", "script": "scripts/ranking_judge.json"},
            "retriever": {"type": "local"},
            "state_retriever": {"type": "local"},
        },
    })


if __name__ == "__main__":
    os.makedirs(os.path.join(HERE, "scripts"), exist_ok=True)
    corpus()
    informalizer_scripts()
    mpr()
    qr()
    prover()
    config()
