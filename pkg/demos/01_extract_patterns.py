# %% [markdown]
# # From raw tweets to P(n)
#
# Build a small synthetic corpus with a non-monotone channel profile, write it
# in the SNAP 3-line format, read it back and aggregate two-hop retweets into
# per-pattern retweeting probabilities.

# %%
import io

from qattention.cascade import BuildStats, aggregate_patterns, build_instances
from qattention.ingest import ParseStats, dumps_corpus, extract_retweet_chain, parse_snap_stream
from qattention.simulator import SequenceConfig, simulate_sequence_world

# %%
print(extract_retweet_chain("RT @B1: RT @A: hello").relays)

# %%
config = SequenceConfig([0.05, 0.04, 0.06, 0.08, 0.10, 0.07], instances_per_pattern=40, tweets_per_source=800, seed=1)
text = dumps_corpus(simulate_sequence_world(config), "snap")
print(text[:300])

# %%
parsed = ParseStats()
records = list(parse_snap_stream(io.StringIO(text), parsed))
build = BuildStats()
instances = build_instances(records, n_max=6, stats=build)
stats = aggregate_patterns(instances, 6)
print(f"parsed {parsed.parsed} tweets ({parsed.malformed} malformed), {build.kept} instances")

# %%
print(" n  count   mean     se")
for n, row in stats.rows.items():
    print(f"{n:2d}  {row.instance_count:5d}  {row.mean_probability:.4f}  {row.std_error:.4f}")
