"""How cassettes make the stochastic stages deterministic.

Requests are matched by a fingerprint of (stage tag, normalized prompt).
A fingerprint can hold several responses: replay serves them in order and
then repeats the last one, which is exactly what the correction loop needs
because a regeneration request is byte-identical to the original
translation request.

Run: python demos/05_record_replay.py
"""

from optanchor import Cassette, CompletionRequest, Gateway, ReplayMiss
from optanchor.gateway import fingerprint

cassette = Cassette()
cassette.add("translate", "turn this rule into code", "cap_total = quota  # first try")
cassette.add("translate", "turn this rule into code", "model.addConstr(total <= quota)")

gateway = Gateway(mode="replay", cassette=cassette)
request = CompletionRequest(prompt="turn this rule into code", tag="translate")

print("two recorded responses under one fingerprint, served in order:")
print(f"  call 1 -> {gateway.complete(request)!r}")
print(f"  call 2 -> {gateway.complete(request)!r}")
print(f"  call 3 -> {gateway.complete(request)!r}   (sticks on the last entry)")
print()

fresh = gateway.session()
print(f"a fresh session rewinds the cursor: {fresh.complete(request)!r}")
print()

same = fingerprint("translate", "turn this rule into code\r\n")
base = fingerprint("translate", "turn this rule into code")
print(f"line endings and trailing whitespace do not change fingerprints: {same == base}")
other_tag = fingerprint("verify", "turn this rule into code")
print(f"the stage tag does: {other_tag != base}")
print()

try:
    gateway.complete(CompletionRequest(prompt="never recorded", tag="translate"))
except ReplayMiss as exc:
    print(f"unknown prompts fail loudly instead of inventing output: ReplayMiss({exc})")
