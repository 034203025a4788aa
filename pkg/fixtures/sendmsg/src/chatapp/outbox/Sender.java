package chatapp.outbox;

public class Sender {
    public void prepare(String body) {
        build(body);
    }

    public void build(String body) {
        finish(body);
    }

    public void finish(String body) {
        sendMessage(body);
    }

    public void sendMessage(String body) {
        // the actual network write is outside this fixture's scope
    }
}
